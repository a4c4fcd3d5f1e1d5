#include "copilot/engine.hpp"

#include <cstdio>
#include <set>

#include "copilot/log.hpp"
#include "copilot/replay.hpp"
#include "copilot/text.hpp"

namespace copilot {

namespace {

std::string numbered(const char* prefix, int n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s-%04d", prefix, n);
  return buf;
}

}  // namespace

Executor inline_executor() {
  return [](std::function<void()> job) { job(); };
}

SessionOwner::SessionOwner(std::string session_id, Session created, Deps deps)
    : session_id_(std::move(session_id)),
      deps_(std::move(deps)),
      profile_(std::make_shared<const JobProfile>(created.profile())),
      created_(std::move(created)),
      transcript_(deps_.config.out_of_order_tolerance_ms) {
  if (!deps_.log) deps_.log = std::make_shared<MemoryEventLog>();
  if (!deps_.executor) deps_.executor = inline_executor();
  if (!deps_.clock) {
    static const SystemClock system_clock;
    deps_.clock = &system_clock;
  }
  if (!deps_.provider) throw Error(ErrorCode::invalid_config, "session owner needs a model provider");
}

std::shared_ptr<SessionOwner> SessionOwner::create(std::string session_id, JobProfile profile, Deps deps) {
  auto created = Session::create(session_id, std::move(profile));
  return std::make_shared<SessionOwner>(std::move(session_id), std::move(created), std::move(deps));
}

std::shared_ptr<SessionOwner> SessionOwner::restore(Deps deps) {
  if (!deps.log) throw Error(ErrorCode::invalid_config, "restore needs an event log");
  auto events = deps.log->read_all();
  auto session = replay_log(events);
  auto owner = std::make_shared<SessionOwner>(session.id(), Session::create(session.id(), session.profile()),
                                              std::move(deps));

  std::vector<EvalJob> jobs;
  {
    Lock lock(owner->mutex_);
    std::set<Seq> evaluated;
    for (const auto& e : events) {
      if (e.kind == EventKind::graph_delta) {
        evaluated.insert(e.payload.at("delta").get<GraphDelta>().basis_seq);
      } else if (e.kind == EventKind::degraded && e.payload.at("stage") == "skill_eval") {
        evaluated.insert(e.payload.at("seq").get<Seq>());
      }
    }
    for (const auto& seg : session.segments()) owner->transcript_.commit_final(seg);
    owner->note_counter_ = static_cast<int>(session.notes().size());
    owner->question_counter_ = static_cast<int>(session.suggestions().size());
    owner->events_ = std::move(events);
    const bool live = session.state() == SessionState::live;
    owner->live_ = std::move(session);
    if (live) {
      for (const auto& seg : owner->live_->segments()) {
        if (seg.speaker == Speaker::candidate && !evaluated.contains(seg.seq)) owner->deferred_.push_back(seg);
      }
      if (!owner->deferred_.empty()) {
        log(LogLevel::info, "session " + owner->session_id_ + ": resuming " +
                                std::to_string(owner->deferred_.size()) + " unevaluated segment(s)");
      }
      jobs = owner->take_jobs(lock, true);
    }
  }
  owner->dispatch(std::move(jobs));
  return owner;
}

void SessionOwner::require_not_failed() const {
  if (failure_) throw *failure_;
}

void SessionOwner::emit(const Lock&, EventKind kind, nlohmann::json payload) {
  require_not_failed();
  EventEnvelope envelope{static_cast<std::int64_t>(events_.size()) + 1, session_id_, kind, deps_.clock->now_ms(),
                         std::move(payload)};
  apply_event(live_, envelope);
  try {
    deps_.log->append(envelope);
  } catch (const Error& e) {
    failure_ = Error(ErrorCode::storage_failure, e.what());
    // Drop the unlogged event from memory as well.
    if (events_.empty()) {
      live_.reset();
    } else {
      live_ = replay_log(events_);
    }
    log(LogLevel::error, "session " + session_id_ + ": " + e.what());
    for (auto& [_, sub] : subscribers_) {
      if (sub.on_fatal) sub.on_fatal(*failure_);
    }
    throw *failure_;
  }
  events_.push_back(envelope);
  for (auto& [_, sub] : subscribers_) {
    if (sub.on_event) sub.on_event(events_.back());
  }
}

void SessionOwner::start() {
  Lock lock(mutex_);
  if (live_) throw Error(ErrorCode::wrong_state, "session " + session_id_ + " already started");
  emit(lock, EventKind::session_started, payload::session_started(*profile_));
}

std::vector<SessionOwner::EvalJob> SessionOwner::take_jobs(const Lock&, bool flush) {
  std::vector<EvalJob> jobs;
  const auto window = std::max<std::size_t>(1, deps_.config.mapper.batch_window);
  if (deferred_.empty() || (!flush && deferred_.size() < window)) return jobs;
  for (auto& seg : deferred_) {
    auto ctx = context_window(live_->segments(), seg.seq, deps_.config.mapper.context_window);
    eval_order_.push_back(seg.seq);
    jobs.push_back(EvalJob{seg.seq, std::move(seg), std::move(ctx)});
  }
  deferred_.clear();
  return jobs;
}

void SessionOwner::dispatch(std::vector<EvalJob> jobs) {
  for (auto& job : jobs) {
    auto self = shared_from_this();
    const Seq seq = job.seq;
    auto run = [self, job = std::move(job)] {
      Extraction extraction;
      try {
        extraction = extract_evidence(*self->profile_, job.segment, job.context, *self->deps_.provider,
                                      self->deps_.config.policy);
      } catch (const std::exception& e) {
        extraction.basis_seq = job.seq;
        extraction.failure = FailureInfo{FailureClass::transport, e.what()};
      }
      self->complete(job.seq, std::move(extraction));
    };
    try {
      deps_.executor(std::move(run));
    } catch (const std::exception& e) {
      Extraction failed;
      failed.basis_seq = seq;
      failed.failure = FailureInfo{FailureClass::transport, std::string("executor rejected job: ") + e.what()};
      complete(seq, std::move(failed));
    }
  }
}

void SessionOwner::complete(Seq seq, Extraction extraction) {
  Lock lock(mutex_);
  eval_results_[seq] = std::move(extraction);
  apply_ready(lock);
  idle_cv_.notify_all();
}

void SessionOwner::apply_ready(const Lock& lock) {
  while (!eval_order_.empty()) {
    auto it = eval_results_.find(eval_order_.front());
    if (it == eval_results_.end()) return;
    auto extraction = std::move(it->second);
    eval_results_.erase(it);
    eval_order_.pop_front();
    if (failure_) continue;
    try {
      if (extraction.failure) {
        emit(lock, EventKind::degraded,
             payload::degraded("skill_eval", to_string(extraction.failure->cls), extraction.failure->message,
                               extraction.basis_seq));
        continue;
      }
      auto delta = finalize_delta(live_->graph(), *profile_, extraction);
      const bool progressed = !delta.coverage_changes.empty();
      emit(lock, EventKind::graph_delta, payload::graph_delta(delta));
      if (progressed) {
        emit(lock, EventKind::skills_progress, payload::skills_progress(coverage(live_->graph(), *profile_)));
      }
    } catch (const std::exception& e) {
      log(LogLevel::error, "session " + session_id_ + ": evaluation of seq " +
                               std::to_string(extraction.basis_seq) + " not applied: " + e.what());
    }
  }
}

IngestResult SessionOwner::ingest(TranscriptSegment segment) {
  IngestResult result;
  std::vector<EvalJob> jobs;
  {
    Lock lock(mutex_);
    require_not_failed();
    if (current().state() != SessionState::live) {
      throw Error(ErrorCode::session_not_live, "session " + session_id_ + " is " +
                                                   std::string(to_string(current().state())));
    }
    auto verdict = transcript_.classify(segment);
    result.outcome = verdict.outcome;
    result.out_of_order = verdict.out_of_order;
    result.reason = std::move(verdict.reason);
    if (result.outcome == IngestOutcome::rejected) return result;
    if (!segment.is_final()) {
      segment.seq = 0;
      transcript_.commit_partial(segment);
      for (auto& [_, sub] : subscribers_) {
        if (sub.on_partial) sub.on_partial(segment);
      }
      return result;
    }
    if (text::trim(segment.text).empty()) {
      result.outcome = IngestOutcome::rejected;
      result.reason = "final segment has no text";
      return result;
    }
    segment.seq = live_->last_seq() + 1;
    emit(lock, EventKind::segment_final, payload::segment_final(segment, result.out_of_order));
    transcript_.commit_final(segment);
    result.seq = segment.seq;
    if (segment.speaker == Speaker::candidate) deferred_.push_back(segment);
    jobs = take_jobs(lock, false);
  }
  dispatch(std::move(jobs));
  return result;
}

Note SessionOwner::add_note(std::string_view text) {
  Lock lock(mutex_);
  require_not_failed();
  if (current().state() != SessionState::live) {
    throw Error(ErrorCode::session_not_live, "notes can only be added to a live session");
  }
  Millis wall = deps_.clock->now_ms() - live_->started_at();
  if (!live_->notes().empty()) wall = std::max(wall, live_->notes().back().wall_time);
  wall = std::max<Millis>(wall, 0);

  Note note;
  note.note_id = numbered("n", note_counter_ + 1);
  note.text = std::string(text::trim(text));
  note.wall_time = wall;
  if (!live_->segments().empty()) note.anchor_seq = live_->last_seq();
  if (note.text.empty()) throw Error(ErrorCode::empty_text, "note text is empty");
  emit(lock, EventKind::note_added, payload::note_added(note));
  ++note_counter_;
  return live_->notes().back();
}

SuggestOutcome SessionOwner::request_question(QuestionRequest request) {
  std::lock_guard serial(question_mutex_);
  QuestionRequest prepared;
  std::optional<Session> view;
  std::string suggestion_id;
  {
    Lock lock(mutex_);
    require_not_failed();
    prepared = prepare_request(current(), std::move(request));
    if (const auto* hit = find_cached(current(), prepared)) {
      auto cached = *hit;
      emit(lock, EventKind::question_ready, payload::question_ready(cached, true));
      return {std::move(cached), true};
    }
    view = current();
    suggestion_id = numbered("q", question_counter_ + 1);
  }

  QuestionSuggestion suggestion;
  try {
    suggestion = generate_question(*view, prepared, *deps_.provider, deps_.config.policy, deps_.config.questions,
                                   suggestion_id);
  } catch (const ProviderFailure& f) {
    Lock lock(mutex_);
    if (!failure_) {
      emit(lock, EventKind::degraded,
           payload::degraded("question_gen", to_string(f.failure_class()), f.what(),
                             prepared.target_segment_seq.value_or(0)));
    }
    throw;
  }

  Lock lock(mutex_);
  emit(lock, EventKind::question_ready, payload::question_ready(suggestion, false));
  ++question_counter_;
  return {std::move(suggestion), false};
}

void SessionOwner::end() {
  for (;;) {
    std::vector<EvalJob> jobs;
    {
      Lock lock(mutex_);
      require_not_failed();
      if (current().state() != SessionState::live) {
        throw Error(ErrorCode::session_not_live, "session " + session_id_ + " is not live");
      }
      jobs = take_jobs(lock, true);
      if (jobs.empty()) {
        idle_cv_.wait(lock, [&] { return eval_order_.empty() || failure_.has_value(); });
        require_not_failed();
        if (deferred_.empty() && current().state() == SessionState::live) {
          emit(lock, EventKind::session_ended, payload::session_ended());
          return;
        }
        continue;
      }
    }
    dispatch(std::move(jobs));
  }
}

SummaryReport SessionOwner::summarize() {
  std::optional<Session> view;
  {
    Lock lock(mutex_);
    require_not_failed();
    if (current().state() != SessionState::ended) {
      throw Error(ErrorCode::wrong_state, "summary requires an ended session; session " + session_id_ + " is " +
                                              std::string(to_string(current().state())));
    }
    view = current();
  }
  auto report = generate_summary(*view, *deps_.provider, deps_.config.policy, deps_.clock->now_ms(),
                                 deps_.config.summary);
  Lock lock(mutex_);
  emit(lock, EventKind::summary_ready, payload::summary_ready(report));
  return report;
}

void SessionOwner::wait_idle() {
  Lock lock(mutex_);
  idle_cv_.wait(lock, [&] { return eval_order_.empty() || failure_.has_value(); });
}

std::size_t SessionOwner::pending_evaluations() const {
  Lock lock(mutex_);
  return eval_order_.size() + deferred_.size();
}

SessionState SessionOwner::state() const {
  Lock lock(mutex_);
  return current().state();
}

std::shared_ptr<const Session> SessionOwner::snapshot() const {
  Lock lock(mutex_);
  return std::make_shared<const Session>(current());
}

std::vector<EventEnvelope> SessionOwner::events() const {
  Lock lock(mutex_);
  return events_;
}

bool SessionOwner::failed() const {
  Lock lock(mutex_);
  return failure_.has_value();
}

std::size_t SessionOwner::subscribe(Subscriber subscriber) {
  Lock lock(mutex_);
  if (subscriber.on_event) {
    for (const auto& e : events_) subscriber.on_event(e);
  }
  if (failure_ && subscriber.on_fatal) subscriber.on_fatal(*failure_);
  const auto handle = next_subscriber_++;
  subscribers_.emplace(handle, std::move(subscriber));
  return handle;
}

void SessionOwner::unsubscribe(std::size_t handle) {
  Lock lock(mutex_);
  subscribers_.erase(handle);
}

std::size_t SessionOwner::subscriber_count() const {
  Lock lock(mutex_);
  return subscribers_.size();
}

std::size_t pump(TranscriptSource& source, SessionOwner& owner) {
  std::size_t finals = 0;
  while (auto segment = source.next()) {
    if (owner.ingest(std::move(*segment)).seq) ++finals;
  }
  return finals;
}

}  // namespace copilot
