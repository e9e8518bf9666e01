#include "congr/judge.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include "congr/corpus.hpp"
#include "congr/error.hpp"

namespace congr {

using nlohmann::json;

const char* to_string(TaskKind kind) { return kind == TaskKind::Math ? "math" : "text"; }

const char* to_string(VerdictKind kind) {
  switch (kind) {
    case VerdictKind::Equivalence: return "equivalence";
    case VerdictKind::Edit: return "edit";
    case VerdictKind::Verify: return "verify";
    case VerdictKind::Synthesize: return "synthesize";
  }
  return "unknown";
}

TaskKind parse_task_kind(std::string_view name) {
  if (name == "text") return TaskKind::Text;
  if (name == "math") return TaskKind::Math;
  throw Error(ErrorCode::InvalidArgument, "task kind must be 'text' or 'math'");
}

namespace {

std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n\f\v";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::string_view strip_chars(std::string_view s, std::string_view chars) {
  while (!s.empty() && chars.find(s.front()) != std::string_view::npos) s.remove_prefix(1);
  while (!s.empty() && chars.find(s.back()) != std::string_view::npos) s.remove_suffix(1);
  return s;
}

std::set<std::string> word_set(std::string_view text) {
  std::set<std::string> out;
  bool blank = trim(text).empty();
  if (blank) return out;
  for (const auto& t : word_tokens(tokenize(text))) out.insert(to_lower(t));
  return out;
}

std::string utc_timestamp() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Reply parsing

std::optional<bool> parse_equivalence_reply(std::string_view reply) {
  std::string_view last;
  std::size_t pos = 0;
  while (pos <= reply.size()) {
    auto nl = reply.find('\n', pos);
    auto line = trim(reply.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    if (!line.empty()) last = line;
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  std::string verdict = to_lower(strip_chars(trim(last), " \t-*`'\".:"));
  if (verdict == "equivalent") return true;
  if (verdict == "not equivalent") return false;
  return std::nullopt;
}

std::optional<ScorePair> parse_verify_reply(std::string_view reply) {
  auto at = reply.rfind("Final score:");
  if (at == std::string_view::npos) return std::nullopt;
  std::string tail(reply.substr(at + 12));
  static const std::regex tuple(R"(^\s*\**\s*\(\s*([01])\s*,\s*([01])\s*\))");
  std::smatch m;
  if (!std::regex_search(tail, m, tuple)) return std::nullopt;
  return ScorePair{m[1].str() == "1" ? 1 : 0, m[2].str() == "1" ? 1 : 0};
}

EditOutcome parse_edit_reply(std::string_view reply) {
  auto t = trim(reply);
  if (to_lower(strip_chars(t, "\"'")) == "abstain") return EditOutcome::abstain();
  return EditOutcome::keep(std::string(t));
}

std::optional<std::string> extract_boxed(std::string_view text) {
  static constexpr std::string_view kTag = "\\boxed{";
  auto at = text.rfind(kTag);
  if (at == std::string_view::npos) return std::nullopt;
  std::size_t depth = 1;
  std::size_t begin = at + kTag.size();
  for (std::size_t i = begin; i < text.size(); ++i) {
    if (text[i] == '{') ++depth;
    if (text[i] == '}' && --depth == 0) return std::string(text.substr(begin, i - begin));
  }
  return std::nullopt;
}

std::string strip_markers(std::string_view text) {
  constexpr char kHole = '\x01';
  std::string s(text);
  for (auto marker : {markers::kStartUncertain, markers::kEndUncertain, markers::kStartPossibleError,
                      markers::kEndPossibleError}) {
    std::size_t at;
    while ((at = s.find(marker)) != std::string::npos) s.replace(at, marker.size(), 1, kHole);
  }
  // Collapse the gaps left behind, keeping line structure. A gap that held a
  // marker and is followed by punctuation closes up entirely.
  std::string out;
  bool space = false, hole = false;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == kHole) {
      space = true;
      hole |= c == kHole;
      continue;
    }
    bool close_up = hole && is_sentence_punctuation(c);
    if (space && !close_up && !out.empty() && out.back() != '\n' && c != '\n') out += ' ';
    space = hole = false;
    out += c;
  }
  return std::string(trim(out));
}

double word_jaccard(std::string_view a, std::string_view b) {
  auto sa = word_set(a);
  auto sb = word_set(b);
  if (sa.empty() && sb.empty()) return 1.0;
  std::size_t common = 0;
  for (const auto& w : sa) common += sb.count(w);
  return static_cast<double>(common) / static_cast<double>(sa.size() + sb.size() - common);
}

// ---------------------------------------------------------------------------
// Offline provider

bool OfflineProvider::equivalent(std::string_view a, std::string_view b, TaskKind) {
  return word_jaccard(a, b) >= kJaccardThreshold;
}

EditOutcome OfflineProvider::edit(std::string_view draft, std::string_view) {
  auto t = trim(draft);
  if (t.empty()) return EditOutcome::abstain();
  if (word_tokens(tokenize(t)).size() < kMinEditWords) return EditOutcome::abstain();
  char last = t.back();
  if (last != '.' && last != '!' && last != '?') return EditOutcome::abstain();
  return EditOutcome::keep(std::string(draft));
}

ScorePair OfflineProvider::verify(std::string_view, std::string_view, std::string_view) { return {1, 1}; }

std::string OfflineProvider::synthesize(std::string_view, const std::vector<std::string>& candidates) {
  return candidates.empty() ? std::string() : strip_markers(candidates.front());
}

// ---------------------------------------------------------------------------
// Remote provider

RemoteProvider::RemoteProvider(RemoteConfig config, std::shared_ptr<Transport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
  while (!config_.base_url.empty() && config_.base_url.back() == '/') config_.base_url.pop_back();
}

std::string RemoteProvider::complete(const std::string& prompt) {
  json body = {{"model", config_.model},
               {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
               {"temperature", config_.temperature}};
  const std::string payload = body.dump();
  const std::string url = config_.base_url + "/chat/completions";
  std::vector<std::pair<std::string, std::string>> headers;
  if (!config_.api_key.empty()) headers.emplace_back("Authorization", "Bearer " + config_.api_key);

  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0 && config_.backoff_ms > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(config_.backoff_ms << (attempt - 1)));
    }
    HttpReply reply;
    try {
      ++transport_calls_;
      reply = transport_->post(url, payload, headers);
    } catch (const Error& e) {
      last_error = e.what();
      continue;
    }
    if (reply.status == 429 || reply.status >= 500) {
      last_error = "HTTP " + std::to_string(reply.status);
      continue;
    }
    if (reply.status != 200) {
      throw Error(ErrorCode::JudgeTransport,
                  "judge service answered HTTP " + std::to_string(reply.status) + ": " + reply.body);
    }
    try {
      auto doc = json::parse(reply.body);
      return doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::JudgeParse, std::string("malformed chat completion: ") + e.what());
    }
  }
  throw Error(ErrorCode::JudgeTransport, "judge service unavailable at " + url + ": " + last_error);
}

template <typename Parse>
auto RemoteProvider::ask(const std::string& prompt, Parse parse, const char* what) {
  std::string last;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    last = complete(prompt);
    if (auto parsed = parse(last)) return *parsed;
  }
  throw Error(ErrorCode::JudgeParse, std::string("could not parse ") + what + " reply: " + last);
}

bool RemoteProvider::equivalent(std::string_view a, std::string_view b, TaskKind kind) {
  return ask(prompts::equivalence(kind, a, b), parse_equivalence_reply, "equivalence");
}

EditOutcome RemoteProvider::edit(std::string_view draft, std::string_view task_label) {
  return parse_edit_reply(complete(prompts::edit(task_label, draft)));
}

ScorePair RemoteProvider::verify(std::string_view problem, std::string_view partial_a,
                                 std::string_view partial_b) {
  return ask(prompts::verify(problem, partial_a, partial_b), parse_verify_reply, "verification");
}

std::string RemoteProvider::synthesize(std::string_view problem, const std::vector<std::string>& candidates) {
  return complete(prompts::synthesis(problem, candidates));
}

// ---------------------------------------------------------------------------
// Cache

VerdictCache::VerdictCache(std::string path) : path_(std::move(path)) {
  std::ifstream in(path_);
  if (!in) return;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    try {
      auto rec = json::parse(line);
      records_[rec.at("fingerprint").get<std::string>()] = rec.at("payload");
    } catch (const json::exception&) {
      // A torn final line from an interrupted run; later records still load.
      continue;
    }
  }
}

std::optional<json> VerdictCache::lookup(const std::string& fp) const {
  std::lock_guard lock(mutex_);
  auto it = records_.find(fp);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

void VerdictCache::store(const std::string& fp, VerdictKind kind, const std::string& provider,
                         const json& payload) {
  std::lock_guard lock(mutex_);
  if (!records_.emplace(fp, payload).second) return;
  if (path_.empty()) return;
  json rec = {{"fingerprint", fp},
              {"kind", to_string(kind)},
              {"provider", provider},
              {"payload", payload},
              {"timestamp", utc_timestamp()}};
  std::ofstream out(path_, std::ios::app);
  if (!out) throw Error(ErrorCode::Io, "cannot append to verdict cache " + path_);
  out << rec.dump() << '\n';
}

std::size_t VerdictCache::size() const {
  std::lock_guard lock(mutex_);
  return records_.size();
}

json VerdictCache::summarize(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open verdict cache " + path);
  json by_kind = json::object();
  json by_provider = json::object();
  std::set<std::string> seen;
  std::size_t lines = 0;
  std::size_t malformed = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++lines;
    try {
      auto rec = json::parse(line);
      seen.insert(rec.at("fingerprint").get<std::string>());
      std::string kind = rec.value("kind", "unknown");
      std::string provider = rec.value("provider", "unknown");
      by_kind[kind] = by_kind.value(kind, 0) + 1;
      by_provider[provider] = by_provider.value(provider, 0) + 1;
    } catch (const json::exception&) {
      ++malformed;
    }
  }
  return {{"path", path},
          {"records", lines - malformed},
          {"unique_fingerprints", seen.size()},
          {"malformed_lines", malformed},
          {"by_kind", by_kind},
          {"by_provider", by_provider}};
}

std::string fingerprint(VerdictKind kind, std::string_view template_id, std::string_view provider,
                        const std::vector<std::string>& inputs) {
  json doc = json::array({to_string(kind), template_id, provider, inputs});
  const std::string bytes = doc.dump();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

// ---------------------------------------------------------------------------
// Judge

Judge::Judge(std::shared_ptr<Provider> provider, std::shared_ptr<VerdictCache> cache)
    : provider_(std::move(provider)), cache_(std::move(cache)) {
  if (!provider_) throw Error(ErrorCode::InvalidArgument, "judge needs a provider");
  if (!cache_) cache_ = std::make_shared<VerdictCache>();
}

Judge Judge::offline() { return Judge(std::make_shared<OfflineProvider>(), std::make_shared<VerdictCache>()); }

json Judge::resolve(VerdictKind kind, const std::string& fp, const std::function<json()>& compute) {
  std::promise<json> promise;
  {
    std::unique_lock lock(mutex_);
    if (auto hit = cache_->lookup(fp)) {
      ++counters_.cache_hits;
      return *hit;
    }
    auto it = in_flight_.find(fp);
    if (it != in_flight_.end()) {
      auto pending = it->second;
      ++counters_.cache_hits;
      lock.unlock();
      return pending.get();
    }
    in_flight_.emplace(fp, promise.get_future().share());
    ++counters_.provider_calls;
  }
  try {
    json payload = compute();
    cache_->store(fp, kind, provider_->tag(), payload);
    promise.set_value(payload);
    std::lock_guard lock(mutex_);
    in_flight_.erase(fp);
    return payload;
  } catch (...) {
    promise.set_exception(std::current_exception());
    std::lock_guard lock(mutex_);
    in_flight_.erase(fp);
    throw;
  }
}

bool Judge::equivalent(std::string_view a, std::string_view b, TaskKind kind) {
  {
    std::lock_guard lock(mutex_);
    ++counters_.equivalence;
  }
  if (a == b) return true;
  if (trim(a).empty() || trim(b).empty()) {
    throw Error(ErrorCode::InvalidArgument, "equivalence needs two non-empty texts");
  }
  std::string first(std::min(a, b));
  std::string second(std::max(a, b));
  auto fp = fingerprint(VerdictKind::Equivalence, prompts::template_id(VerdictKind::Equivalence, kind),
                        provider_->tag(), {first, second});
  auto payload = resolve(VerdictKind::Equivalence, fp,
                         [&] { return json(provider_->equivalent(first, second, kind)); });
  return payload.get<bool>();
}

EditOutcome Judge::edit_and_finalize(std::string_view draft, std::string_view task_label) {
  {
    std::lock_guard lock(mutex_);
    ++counters_.edit;
  }
  auto fp = fingerprint(VerdictKind::Edit, prompts::template_id(VerdictKind::Edit), provider_->tag(),
                        {std::string(task_label), std::string(draft)});
  auto payload = resolve(VerdictKind::Edit, fp, [&] {
    auto outcome = provider_->edit(draft, task_label);
    return outcome.abstained() ? json{{"abstain", true}} : json{{"abstain", false}, {"text", *outcome.text}};
  });
  if (payload.at("abstain").get<bool>()) return EditOutcome::abstain();
  return EditOutcome::keep(payload.at("text").get<std::string>());
}

ScorePair Judge::verify_pair(std::string_view problem, std::string_view partial_a, std::string_view partial_b) {
  {
    std::lock_guard lock(mutex_);
    ++counters_.verify;
  }
  if (trim(partial_a).empty() || trim(partial_b).empty()) {
    throw Error(ErrorCode::InvalidArgument, "verification needs two non-empty partial solutions");
  }
  if (partial_a == partial_b) return {1, 1};
  auto fp = fingerprint(VerdictKind::Verify, prompts::template_id(VerdictKind::Verify), provider_->tag(),
                        {std::string(problem), std::string(partial_a), std::string(partial_b)});
  auto payload = resolve(VerdictKind::Verify, fp, [&] {
    auto s = provider_->verify(problem, partial_a, partial_b);
    return json::array({s.first, s.second});
  });
  return {payload.at(0).get<int>(), payload.at(1).get<int>()};
}

std::string Judge::synthesize_final(std::string_view problem, const std::vector<std::string>& candidates) {
  {
    std::lock_guard lock(mutex_);
    ++counters_.synthesize;
  }
  if (candidates.empty()) throw Error(ErrorCode::InvalidArgument, "synthesis needs at least one candidate");
  std::vector<std::string> inputs{std::string(problem)};
  inputs.insert(inputs.end(), candidates.begin(), candidates.end());
  auto fp = fingerprint(VerdictKind::Synthesize, prompts::template_id(VerdictKind::Synthesize),
                        provider_->tag(), inputs);
  auto payload = resolve(VerdictKind::Synthesize, fp,
                         [&] { return json(provider_->synthesize(problem, candidates)); });
  return payload.get<std::string>();
}

JudgeCounters Judge::counters() const {
  std::lock_guard lock(mutex_);
  return counters_;
}

}  // namespace congr
