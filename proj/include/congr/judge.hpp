#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

namespace congr {

enum class TaskKind { Text, Math };
enum class VerdictKind { Equivalence, Edit, Verify, Synthesize };

const char* to_string(TaskKind kind);
const char* to_string(VerdictKind kind);
TaskKind parse_task_kind(std::string_view name);

struct ScorePair {
  int first = 1;
  int second = 1;

  bool operator==(const ScorePair&) const = default;
};

/// Result of the edit step: cleaned text, or an abstention.
struct EditOutcome {
  std::optional<std::string> text;

  bool abstained() const noexcept { return !text.has_value(); }
  static EditOutcome abstain() { return {}; }
  static EditOutcome keep(std::string t) { return {std::move(t)}; }
};

namespace markers {
inline constexpr std::string_view kStartUncertain = "*START_UNCERTAIN_REGION*";
inline constexpr std::string_view kEndUncertain = "*END_UNCERTAIN_REGION*";
inline constexpr std::string_view kStartPossibleError = "*START_POSSIBLE_ERROR*";
inline constexpr std::string_view kEndPossibleError = "*END_POSSIBLE_ERROR*";
}  // namespace markers

namespace prompts {

std::string equivalence(TaskKind kind, std::string_view text_1, std::string_view text_2);
std::string edit(std::string_view task, std::string_view text);
std::string verify(std::string_view problem, std::string_view partial_1, std::string_view partial_2);
std::string synthesis(std::string_view problem, const std::vector<std::string>& candidates);

/// Stable identifiers that enter verdict fingerprints.
std::string_view template_id(VerdictKind kind, TaskKind task = TaskKind::Text);

}  // namespace prompts

std::optional<bool> parse_equivalence_reply(std::string_view reply);
std::optional<ScorePair> parse_verify_reply(std::string_view reply);
EditOutcome parse_edit_reply(std::string_view reply);

/// Content of the last \boxed{...} in `text`, nested braces included.
std::optional<std::string> extract_boxed(std::string_view text);

/// Removes the four region markers and collapses the leftover whitespace.
std::string strip_markers(std::string_view text);

/// Word-set Jaccard similarity: lowercased word tokens, punctuation dropped.
double word_jaccard(std::string_view a, std::string_view b);

/// A secondary model (or stand-in) answering the four judge questions.
class Provider {
 public:
  virtual ~Provider() = default;

  /// Identifies the provider inside verdict fingerprints ("offline",
  /// "remote:<model>").
  virtual std::string tag() const = 0;
  virtual bool is_remote() const = 0;

  virtual bool equivalent(std::string_view a, std::string_view b, TaskKind kind) = 0;
  virtual EditOutcome edit(std::string_view draft, std::string_view task_label) = 0;
  virtual ScorePair verify(std::string_view problem, std::string_view partial_a,
                           std::string_view partial_b) = 0;
  virtual std::string synthesize(std::string_view problem,
                                 const std::vector<std::string>& candidates) = 0;
};

/// Deterministic stand-in used for hermetic runs.
class OfflineProvider : public Provider {
 public:
  static constexpr double kJaccardThreshold = 0.6;
  static constexpr std::size_t kMinEditWords = 5;

  std::string tag() const override { return "offline"; }
  bool is_remote() const override { return false; }

  bool equivalent(std::string_view a, std::string_view b, TaskKind kind) override;
  EditOutcome edit(std::string_view draft, std::string_view task_label) override;
  ScorePair verify(std::string_view problem, std::string_view partial_a,
                   std::string_view partial_b) override;
  std::string synthesize(std::string_view problem,
                         const std::vector<std::string>& candidates) override;
};

struct HttpReply {
  int status = 0;
  std::string body;
};

/// Moves one JSON request to a chat-completions endpoint. Throws
/// Error(JudgeTransport) when the service cannot be reached.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpReply post(const std::string& url, const std::string& body,
                         const std::vector<std::pair<std::string, std::string>>& headers) = 0;
};

class HttpTransport : public Transport {
 public:
  explicit HttpTransport(int timeout_seconds = 120) : timeout_seconds_(timeout_seconds) {}

  HttpReply post(const std::string& url, const std::string& body,
                 const std::vector<std::pair<std::string, std::string>>& headers) override;

 private:
  int timeout_seconds_;
};

struct RemoteConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "gpt-4.1-mini";
  std::string api_key;
  int max_retries = 3;
  double temperature = 0.0;
  // Delay before retry k is backoff_ms * 2^k.
  int backoff_ms = 500;
};

/// Chat-completions client: one user message per call, temperature 0.
class RemoteProvider : public Provider {
 public:
  RemoteProvider(RemoteConfig config, std::shared_ptr<Transport> transport);

  std::string tag() const override { return "remote:" + config_.model; }
  bool is_remote() const override { return true; }

  bool equivalent(std::string_view a, std::string_view b, TaskKind kind) override;
  EditOutcome edit(std::string_view draft, std::string_view task_label) override;
  ScorePair verify(std::string_view problem, std::string_view partial_a,
                   std::string_view partial_b) override;
  std::string synthesize(std::string_view problem,
                         const std::vector<std::string>& candidates) override;

  /// Sends `prompt` and returns choices[0].message.content.
  std::string complete(const std::string& prompt);

  std::size_t transport_calls() const noexcept { return transport_calls_; }

 private:
  template <typename Parse>
  auto ask(const std::string& prompt, Parse parse, const char* what);

  RemoteConfig config_;
  std::shared_ptr<Transport> transport_;
  std::atomic<std::size_t> transport_calls_{0};
};

/// Append-only JSON-lines store of verdicts keyed by request fingerprint.
class VerdictCache {
 public:
  /// In-memory only.
  VerdictCache() = default;
  /// Loads any existing records from `path`; new verdicts are appended to it.
  explicit VerdictCache(std::string path);

  std::optional<nlohmann::json> lookup(const std::string& fingerprint) const;
  void store(const std::string& fingerprint, VerdictKind kind, const std::string& provider,
             const nlohmann::json& payload);

  std::size_t size() const;
  const std::string& path() const noexcept { return path_; }

  /// Record counts per kind and provider, for `cache-info`.
  static nlohmann::json summarize(const std::string& path);

 private:
  std::string path_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, nlohmann::json> records_;
};

/// Content hash of (kind, template id, provider, ordered inputs).
std::string fingerprint(VerdictKind kind, std::string_view template_id, std::string_view provider,
                        const std::vector<std::string>& inputs);

struct JudgeCounters {
  std::size_t equivalence = 0;
  std::size_t edit = 0;
  std::size_t verify = 0;
  std::size_t synthesize = 0;
  std::size_t cache_hits = 0;
  std::size_t provider_calls = 0;
};

/// Provider plus verdict cache. Safe to share between threads: concurrent
/// identical requests collapse onto one provider call.
class Judge {
 public:
  Judge(std::shared_ptr<Provider> provider, std::shared_ptr<VerdictCache> cache);

  static Judge offline();

  /// Identical texts answer true without consulting anything. The pair is
  /// put in canonical order first, so the verdict is symmetric.
  bool equivalent(std::string_view a, std::string_view b, TaskKind kind);
  EditOutcome edit_and_finalize(std::string_view draft, std::string_view task_label);
  ScorePair verify_pair(std::string_view problem, std::string_view partial_a,
                        std::string_view partial_b);
  std::string synthesize_final(std::string_view problem,
                               const std::vector<std::string>& candidates);

  JudgeCounters counters() const;
  std::string provider_tag() const { return provider_->tag(); }
  Provider& provider() noexcept { return *provider_; }
  VerdictCache& cache() noexcept { return *cache_; }

 private:
  nlohmann::json resolve(VerdictKind kind, const std::string& fp,
                         const std::function<nlohmann::json()>& compute);

  std::shared_ptr<Provider> provider_;
  std::shared_ptr<VerdictCache> cache_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_future<nlohmann::json>> in_flight_;
  JudgeCounters counters_;
};

}  // namespace congr
