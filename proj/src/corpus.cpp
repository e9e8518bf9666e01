#include "congr/corpus.hpp"

#include <fstream>

#include <json.hpp>

#include "congr/error.hpp"

namespace congr {
namespace {

bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

void split_word(std::string_view word, Tokens& out) {
  std::size_t begin = 0;
  std::size_t end = word.size();
  while (begin < end && is_sentence_punctuation(word[begin])) {
    out.emplace_back(1, word[begin]);
    ++begin;
  }
  std::size_t trail = end;
  while (trail > begin && is_sentence_punctuation(word[trail - 1])) --trail;
  if (trail > begin) out.emplace_back(word.substr(begin, trail - begin));
  for (std::size_t i = trail; i < end; ++i) out.emplace_back(1, word[i]);
}

}  // namespace

bool is_sentence_punctuation(char c) noexcept {
  switch (c) {
    case '.': case ',': case ';': case ':': case '!': case '?':
      return true;
    default:
      return false;
  }
}

bool is_punctuation_token(std::string_view token) noexcept {
  if (token.empty()) return false;
  for (char c : token) {
    if (!is_sentence_punctuation(c)) return false;
  }
  return true;
}

Tokens tokenize(std::string_view text) {
  Tokens out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) split_word(text.substr(start, i - start), out);
  }
  if (out.empty()) throw Error(ErrorCode::EmptyResponse, "response is empty after trimming");
  return out;
}

std::string detokenize(const Tokens& tokens) {
  std::string out;
  for (const auto& token : tokens) {
    if (!out.empty() && !is_punctuation_token(token)) out += ' ';
    out += token;
  }
  return out;
}

std::string normalize_text(std::string_view text) { return detokenize(tokenize(text)); }

std::string join_segments(const std::vector<std::string>& segments) {
  Tokens all;
  for (const auto& segment : segments) {
    bool blank = true;
    for (char c : segment) {
      if (!is_space(c)) {
        blank = false;
        break;
      }
    }
    if (blank) continue;
    auto tokens = tokenize(segment);
    all.insert(all.end(), std::make_move_iterator(tokens.begin()),
               std::make_move_iterator(tokens.end()));
  }
  return detokenize(all);
}

Tokens word_tokens(const Tokens& tokens) {
  Tokens out;
  for (const auto& t : tokens) {
    if (!is_punctuation_token(t)) out.push_back(t);
  }
  return out;
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

ResponseSet ResponseSet::make(std::string prompt_id, std::string prompt,
                              std::vector<std::string> responses) {
  if (responses.empty()) throw Error(ErrorCode::InvalidArgument, "response set has no responses");
  ResponseSet rs;
  rs.prompt_id = std::move(prompt_id);
  rs.prompt = std::move(prompt);
  rs.token_seqs.reserve(responses.size());
  for (std::size_t i = 0; i < responses.size(); ++i) {
    try {
      rs.token_seqs.push_back(tokenize(responses[i]));
    } catch (const Error& e) {
      throw Error(e.code(), "response " + std::to_string(i) + " of '" + rs.prompt_id +
                                "': " + e.what());
    }
  }
  rs.responses = std::move(responses);
  return rs;
}

ResponseSet ResponseSet::from_json_line(std::string_view line) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::Format, std::string("invalid JSON record: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("prompt_id") || !doc.contains("responses") ||
      !doc["prompt_id"].is_string() || !doc["responses"].is_array()) {
    throw Error(ErrorCode::Format, "record needs string prompt_id and array responses");
  }
  std::vector<std::string> responses;
  for (const auto& r : doc["responses"]) {
    if (!r.is_string()) throw Error(ErrorCode::Format, "responses must be strings");
    responses.push_back(r.get<std::string>());
  }
  std::string prompt;
  if (doc.contains("prompt")) {
    if (!doc["prompt"].is_string()) throw Error(ErrorCode::Format, "prompt must be a string");
    prompt = doc["prompt"].get<std::string>();
  }
  return make(doc["prompt_id"].get<std::string>(), std::move(prompt), std::move(responses));
}

std::vector<ResponseSet> read_response_sets(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::vector<ResponseSet> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    try {
      out.push_back(ResponseSet::from_json_line(line));
    } catch (const Error& e) {
      throw Error(e.code(), path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace congr
