#include "ttlm/prompts.hpp"

#include <cctype>

#include "ttlm/errors.hpp"
#include "ttlm/model.hpp"  // fnv1a64

namespace ttlm {

namespace {

std::vector<PromptTemplate> build_registry() {
  std::vector<PromptTemplate> reg;

  PromptTemplate tweet3;
  tweet3.name = "tweetsent3";
  tweet3.body =
      "Você é um assistente de perguntas e respostas. Cada contexto passado será um tweet que "
      "está vinculado a um sentimento correspondente. No total, são 3 tipos de sentimentos: "
      "Positivo, Neutro e Negativo. O seu objetivo é dado um tweet, encontrar qual é o seu "
      "sentimento correspondente. Abaixo estão alguns exemplos:\n\n"
      "Tweet: :D que lindo dia ! Resposta: Positivo\n\n"
      "Tweet: eu tô tão cansado :( Resposta: Negativo\n\n"
      "Tweet: Microsoft lança pesquisa resultado de pesquisa com o Ibope sobre uso da "
      "#tecnologia no #trabalho no #Brasil @MicrosoftBr @NielsenIBOPE Resposta: Neutro\n\n"
      "Considere que tweets com chamadas de notícias com sempre neutros, independente do seu "
      "conteúdo, a não ser que o autor emita sua opinião sobre o acontecimento relatado. Dado o "
      "contexto, responda em qual dos 3 tipos de sentimentos o tweet a seguir se enquadra.";
  tweet3.query_prefix = "\n\nTweet: ";
  tweet3.query_suffix = " Resposta:";
  tweet3.labels = {"Positivo", "Neutro", "Negativo"};
  tweet3.canonical = true;
  reg.push_back(std::move(tweet3));

  PromptTemplate news4;
  news4.name = "agnews4";
  news4.body =
      "Você é um assistente de perguntas e respostas. Cada contexto passado será uma notícia "
      "que está vinculada a uma categoria correspondente. No total, são 4 categorias: Mundo, "
      "Esportes, Negócios e Tecnologia. O seu objetivo é dado uma notícia, encontrar qual é a "
      "sua categoria correspondente. Abaixo estão alguns exemplos:\n\n"
      "Notícia: Até o final do ano, a gigante da computação planeja ter seu maior número de "
      "funcionários desde 1991. Resposta: Tecnologia\n\n"
      "Notícia: Michael Phelps ganhou a medalha de ouro no 400 Medley individual e estabeleceu "
      "um recorde mundial em um tempo de 4 minutos 8,26 segundos. Resposta: Esportes\n\n"
      "Notícia: TEEHRAN (Reuters) - Um oficial militar iraniano disse domingo a Israel e os "
      "Estados Unidos não ousariam atacar o Irã, pois poderia revidar em qualquer lugar de "
      "Israel com seus mais recentes mísseis, informou as agências de notícias. Resposta: "
      "Mundo\n\n"
      "Notícia: Reuters-Os varejistas de vestuário esperam que suas modas de volta às aulas "
      "façam a nota entre os adolescentes conscientes do estilo e os jovens adultos neste "
      "outono, mas pode ser uma venda difícil, com os alunos e os pais mantendo um mais "
      "apertado. carteiras. Resposta: Negócios\n\n"
      "Dado o contexto, responda em qual das 4 categorias a notícia a seguir se enquadra.";
  news4.query_prefix = "\n\nNotícia: ";
  news4.query_suffix = " Resposta:";
  news4.labels = {"Mundo", "Esportes", "Negócios", "Tecnologia"};
  news4.canonical = true;
  reg.push_back(std::move(news4));

  PromptTemplate tweet2;
  tweet2.name = "tweetsent2";
  tweet2.body =
      "Você é um assistente de perguntas e respostas. Cada contexto passado será um tweet que "
      "está vinculado a um sentimento correspondente. No total, são 2 tipos de sentimentos: "
      "Positivo e Negativo. O seu objetivo é dado um tweet, encontrar qual é o seu sentimento "
      "correspondente. Abaixo estão alguns exemplos:\n\n"
      "Tweet: :D que lindo dia ! Resposta: Positivo\n\n"
      "Tweet: eu tô tão cansado :( Resposta: Negativo\n\n"
      "Dado o contexto, responda em qual dos 2 tipos de sentimentos o tweet a seguir se "
      "enquadra.";
  tweet2.query_prefix = "\n\nTweet: ";
  tweet2.query_suffix = " Resposta:";
  tweet2.labels = {"Positivo", "Negativo"};
  reg.push_back(std::move(tweet2));

  PromptTemplate fake2;
  fake2.name = "fakenews2";
  fake2.body =
      "Você é um assistente de perguntas e respostas. Cada contexto passado será uma notícia "
      "que está vinculada a uma veracidade correspondente. No total, são 2 classes: Verdadeira "
      "e Falsa. O seu objetivo é dado uma notícia, encontrar qual é a sua veracidade "
      "correspondente.\n\n"
      "Dado o contexto, responda em qual das 2 classes a notícia a seguir se enquadra.";
  fake2.query_prefix = "\n\nNotícia: ";
  fake2.query_suffix = " Resposta:";
  fake2.labels = {"Verdadeira", "Falsa"};
  reg.push_back(std::move(fake2));

  return reg;
}

}  // namespace

const std::vector<PromptTemplate>& prompt_registry() {
  static const std::vector<PromptTemplate> reg = build_registry();
  return reg;
}

const PromptTemplate& find_template(const std::string& name) {
  for (const PromptTemplate& t : prompt_registry()) {
    if (t.name == name) return t;
  }
  std::string known;
  for (const PromptTemplate& t : prompt_registry()) {
    if (!known.empty()) known += ", ";
    known += t.name;
  }
  throw ConfigError("unknown template '" + name + "' (available: " + known + ")");
}

std::string render_prompt(const PromptTemplate& t, const std::string& text) {
  return t.body + t.query_prefix + text + t.query_suffix;
}

namespace {

// Lowercases one UTF-8 code point at s[i]; appends to out; advances i.
// fold_accents additionally maps Latin-1 letters to their ASCII base.
void fold_codepoint(const std::string& s, std::size_t& i, std::string& out, bool fold_accents) {
  const unsigned char c = static_cast<unsigned char>(s[i]);
  if (c < 0x80) {
    out.push_back(static_cast<char>(std::tolower(c)));
    ++i;
    return;
  }
  // Latin-1 supplement: 0xC3 lead byte covers U+00C0..U+00FF.
  if (c == 0xC3 && i + 1 < s.size()) {
    unsigned char low = static_cast<unsigned char>(s[i + 1]);
    i += 2;
    // Uppercase block 0x80..0x9E lowers by +0x20 (except multiplication sign).
    if (low >= 0x80 && low <= 0x9E && low != 0x97) low += 0x20;
    if (fold_accents) {
      const unsigned cp = 0xC0u + (low - 0x80u);  // now in the lowercase block
      char base = 0;
      if (cp >= 0xE0 && cp <= 0xE6) base = 'a';
      else if (cp == 0xE7) base = 'c';
      else if (cp >= 0xE8 && cp <= 0xEB) base = 'e';
      else if (cp >= 0xEC && cp <= 0xEF) base = 'i';
      else if (cp == 0xF1) base = 'n';
      else if ((cp >= 0xF2 && cp <= 0xF6) || cp == 0xF8) base = 'o';
      else if (cp >= 0xF9 && cp <= 0xFC) base = 'u';
      else if (cp == 0xFD || cp == 0xFF) base = 'y';
      if (base != 0) {
        out.push_back(base);
        return;
      }
    }
    out.push_back(static_cast<char>(0xC3));
    out.push_back(static_cast<char>(low));
    return;
  }
  // Any other byte passes through untouched.
  out.push_back(static_cast<char>(c));
  ++i;
}

std::string fold(const std::string& utf8, bool fold_accents) {
  std::string out;
  out.reserve(utf8.size());
  std::size_t i = 0;
  while (i < utf8.size()) fold_codepoint(utf8, i, out, fold_accents);
  return out;
}

bool is_space_byte(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_ascii_punct(unsigned char c) { return c < 0x80 && std::ispunct(c); }

}  // namespace

std::string fold_case(const std::string& utf8) { return fold(utf8, false); }

std::string fold_accents_and_case(const std::string& utf8) { return fold(utf8, true); }

std::optional<std::string> extract_label(const std::string& completion,
                                         std::span<const std::string> labels, bool fold_accents) {
  std::size_t pos = 0;
  while (pos < completion.size() && is_space_byte(static_cast<unsigned char>(completion[pos]))) {
    ++pos;
  }
  // Some completions parrot the cue before answering.
  static const std::string kEcho = "resposta:";
  if (completion.size() - pos >= kEcho.size()) {
    std::string head = completion.substr(pos, kEcho.size());
    for (char& c : head) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (head == kEcho) pos += kEcho.size();
  }
  while (pos < completion.size() && is_space_byte(static_cast<unsigned char>(completion[pos]))) {
    ++pos;
  }
  std::size_t end = pos;
  while (end < completion.size() && !is_space_byte(static_cast<unsigned char>(completion[end]))) {
    ++end;
  }
  std::string token = completion.substr(pos, end - pos);
  while (!token.empty() && is_ascii_punct(static_cast<unsigned char>(token.front()))) {
    token.erase(token.begin());
  }
  while (!token.empty() && is_ascii_punct(static_cast<unsigned char>(token.back()))) {
    token.pop_back();
  }
  if (token.empty()) return std::nullopt;

  const std::string folded =
      fold_accents ? fold_accents_and_case(token) : fold_case(token);
  for (const std::string& label : labels) {
    const std::string flabel = fold_accents ? fold_accents_and_case(label) : fold_case(label);
    if (folded == flabel) return label;
  }
  return std::nullopt;
}

std::uint64_t template_checksum(const PromptTemplate& t) {
  return fnv1a64(t.body + "\x1f" + t.query_prefix + "\x1f" + t.query_suffix);
}

}  // namespace ttlm
