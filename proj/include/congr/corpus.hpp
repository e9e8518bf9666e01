#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace congr {

using Tokens = std::vector<std::string>;

/// Splits a response into word tokens.
///
/// Whitespace separates words. Sentence punctuation (. , ; : ! ?) at either
/// end of a word is split off one character per token; punctuation inside a
/// word ("well-known", "it's", "3.14") stays attached. Case is preserved.
/// Throws Error(EmptyResponse) when the text is blank.
Tokens tokenize(std::string_view text);

/// Joins tokens with single spaces, dropping the space before any token made
/// only of sentence punctuation.
std::string detokenize(const Tokens& tokens);

/// detokenize(tokenize(text)); the canonical whitespace form used when
/// comparing reconstructed responses against their sources.
std::string normalize_text(std::string_view text);

/// Concatenates already-detokenized text segments as if their tokens had been
/// joined in one sequence. Empty segments are skipped.
std::string join_segments(const std::vector<std::string>& segments);

bool is_sentence_punctuation(char c) noexcept;
bool is_punctuation_token(std::string_view token) noexcept;

/// Tokens with pure-punctuation tokens removed.
Tokens word_tokens(const Tokens& tokens);

std::string to_lower(std::string_view text);

/// A prompt and its m sampled responses.
struct ResponseSet {
  std::string prompt_id;
  std::string prompt;
  std::vector<std::string> responses;
  std::vector<Tokens> token_seqs;

  std::size_t m() const noexcept { return responses.size(); }

  /// Validates and tokenizes. Throws Error(EmptyResponse) for a blank
  /// response and Error(InvalidArgument) when there are no responses.
  static ResponseSet make(std::string prompt_id, std::string prompt,
                          std::vector<std::string> responses);

  /// Parses one JSON-lines record {"prompt_id", "prompt", "responses"}.
  static ResponseSet from_json_line(std::string_view line);
};

/// Reads every non-blank line of a JSON-lines file.
std::vector<ResponseSet> read_response_sets(const std::string& path);

}  // namespace congr
