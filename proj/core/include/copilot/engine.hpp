#pragma once

#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "copilot/event_log.hpp"
#include "copilot/events.hpp"
#include "copilot/provider.hpp"
#include "copilot/question_engine.hpp"
#include "copilot/session.hpp"
#include "copilot/skill_mapper.hpp"
#include "copilot/summary_engine.hpp"
#include "copilot/transcript.hpp"

namespace copilot {

struct EngineConfig {
  MapperConfig mapper;
  QuestionConfig questions;
  SummaryConfig summary;
  InvokePolicy policy;
  Millis out_of_order_tolerance_ms = 2000;
};

// Runs a job somewhere: inline, on a pool, or wherever a test decides.
using Executor = std::function<void(std::function<void()>)>;
Executor inline_executor();

// Callbacks run while the owner holds its lock: they must not block and must
// not call back into the owner.
struct Subscriber {
  std::function<void(const EventEnvelope&)> on_event;
  // Ephemeral partial hypotheses; never logged.
  std::function<void(const TranscriptSegment&)> on_partial;
  // The session's log failed; no further events will follow.
  std::function<void(const Error&)> on_fatal;
};

struct IngestResult {
  IngestOutcome outcome = IngestOutcome::rejected;
  std::optional<Seq> seq;
  bool out_of_order = false;
  std::string reason;
};

// Single writer for one session. Every mutation becomes an event that is
// applied to the state, appended to the log and only then pushed to
// subscribers. Skill evaluation runs on the executor; results are applied
// strictly in the order their segments were finalized.
class SessionOwner : public std::enable_shared_from_this<SessionOwner> {
 public:
  struct Deps {
    std::shared_ptr<EventLog> log;
    std::shared_ptr<ModelProvider> provider;
    const Clock* clock = nullptr;
    Executor executor;
    EngineConfig config;
  };

  // State `created`; nothing is logged until start(). Throws invalid_profile.
  static std::shared_ptr<SessionOwner> create(std::string session_id, JobProfile profile, Deps deps);
  // Rebuilds state from deps.log. Live sessions resume evaluation of any
  // candidate segment whose result never reached the log.
  static std::shared_ptr<SessionOwner> restore(Deps deps);

  const std::string& session_id() const noexcept { return session_id_; }

  void start();
  IngestResult ingest(TranscriptSegment segment);
  Note add_note(std::string_view text);
  // Throws ProviderFailure after emitting a degraded event.
  SuggestOutcome request_question(QuestionRequest request);
  // Waits for outstanding evaluations, then emits session_ended.
  void end();
  // Requires state ended; emits summary_ready.
  SummaryReport summarize();

  void wait_idle();
  std::size_t pending_evaluations() const;

  SessionState state() const;
  std::shared_ptr<const Session> snapshot() const;
  std::vector<EventEnvelope> events() const;
  bool failed() const;

  // Delivers every past event in order, then live events. Returns a handle.
  std::size_t subscribe(Subscriber subscriber);
  void unsubscribe(std::size_t handle);
  std::size_t subscriber_count() const;

  SessionOwner(std::string session_id, Session created, Deps deps);

 private:
  using Lock = std::unique_lock<std::mutex>;
  struct EvalJob {
    Seq seq;
    TranscriptSegment segment;
    std::vector<TranscriptSegment> context;
  };

  const Session& current() const { return live_ ? *live_ : created_; }
  void emit(const Lock& lock, EventKind kind, nlohmann::json payload);
  std::vector<EvalJob> take_jobs(const Lock& lock, bool flush);
  void dispatch(std::vector<EvalJob> jobs);
  void complete(Seq seq, Extraction extraction);
  void apply_ready(const Lock& lock);
  void require_not_failed() const;

  std::string session_id_;
  Deps deps_;
  std::shared_ptr<const JobProfile> profile_;

  mutable std::mutex mutex_;
  std::condition_variable idle_cv_;
  Session created_;
  std::optional<Session> live_;
  std::vector<EventEnvelope> events_;
  LiveTranscript transcript_;
  std::optional<Error> failure_;

  std::vector<TranscriptSegment> deferred_;
  std::deque<Seq> eval_order_;
  std::map<Seq, Extraction> eval_results_;

  std::mutex question_mutex_;
  int note_counter_ = 0;
  int question_counter_ = 0;

  std::map<std::size_t, Subscriber> subscribers_;
  std::size_t next_subscriber_ = 1;
};

// Pulls segments from `source` into `owner` until the source ends. Returns
// the number of final segments accepted.
std::size_t pump(TranscriptSource& source, SessionOwner& owner);

}  // namespace copilot
