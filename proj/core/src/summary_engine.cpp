#include "copilot/summary_engine.hpp"

#include <future>
#include <set>
#include <sstream>

#include "copilot/log.hpp"
#include "copilot/text.hpp"

namespace copilot {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

std::string seq_list(const std::vector<Seq>& seqs) {
  std::vector<std::string> parts;
  for (Seq s : seqs) parts.push_back(std::to_string(s));
  return join(parts, ", ");
}

// Notes anchored at a cited segment, or mentioning a lexicon term of the skill.
std::vector<std::string> related_notes(const Session& session, const Skill& skill,
                                       const std::set<Seq>& cited) {
  std::vector<std::string> terms = text::name_tokens(skill.name);
  for (const auto& k : skill.keywords) terms.push_back(text::normalize(k));
  std::vector<std::string> out;
  for (const auto& note : session.notes()) {
    bool related = note.anchor_seq && cited.contains(*note.anchor_seq);
    const auto folded = text::fold_case(note.text);
    for (const auto& t : terms) related = related || text::find_word(folded, t).has_value();
    if (related) out.push_back(note.text);
  }
  return out;
}

struct SectionJob {
  SkillSection section;
  std::optional<ProviderRequest> request;
};

std::string narrative_or_fallback(ModelProvider& provider, const ProviderRequest& request,
                                  const InvokePolicy& policy, bool& fallback) {
  try {
    auto response = invoke(provider, request, policy);
    fallback = false;
    return response.parsed.at("narrative").get<std::string>();
  } catch (const ProviderFailure& f) {
    log(LogLevel::warn, std::string("summarize failed (") + std::string(to_string(f.failure_class())) +
                            "): " + f.what() + "; using fallback narrative");
    fallback = true;
    return {};
  }
}

}  // namespace

std::string fallback_section_narrative(const Skill& skill, const std::vector<EvidenceCitation>& citations) {
  if (citations.empty()) return "No evidence was recorded for " + skill.name + ".";
  std::vector<std::string> parts;
  for (const auto& c : citations) parts.push_back(c.summary);
  return join(parts, "; ") + ".";
}

std::string fallback_overall_narrative(const SummaryReport& r) {
  std::ostringstream out;
  out << r.stats.covered_count << " of " << r.skill_sections.size() << " required skills covered.";
  std::vector<std::string> summaries;
  for (const auto& s : r.skill_sections) {
    for (const auto& c : s.evidence_citations) summaries.push_back(c.summary);
  }
  if (summaries.empty()) {
    out << " No skill evidence was recorded during the interview.";
  } else {
    out << " Evidence: " << join(summaries, "; ") << ".";
  }
  std::vector<std::string> notes;
  for (const auto& n : r.notes_digest) notes.push_back(n.text);
  if (!notes.empty()) out << " Interviewer notes: " << join(notes, "; ") << ".";
  return out.str();
}

SummaryReport generate_summary(const Session& session, ModelProvider& provider, const InvokePolicy& policy,
                               Millis generated_at, const SummaryConfig& config) {
  if (session.state() != SessionState::ended) {
    throw Error(ErrorCode::wrong_state, "summaries are generated for ended sessions (state is " +
                                            std::string(to_string(session.state())) + ")");
  }
  const auto& profile = session.profile();
  const auto& graph = session.graph();
  const auto cov = coverage(graph, profile);

  SummaryReport report;
  report.session_id = session.id();
  report.job_title = profile.title;
  report.generated_at = generated_at;
  for (const auto& n : session.notes()) report.notes_digest.push_back({n.note_id, n.text, n.anchor_seq});
  report.stats.segment_count = static_cast<int>(session.segments().size());
  report.stats.evidence_count = static_cast<int>(graph.evidence_nodes().size());

  std::vector<SectionJob> jobs;
  for (std::size_t i = 0; i < profile.skills.size(); ++i) {
    const auto& skill = profile.skills[i];
    SectionJob job;
    job.section.skill_id = skill.skill_id;
    job.section.skill_name = skill.name;
    job.section.status = cov[i].status;
    if (cov[i].status == CoverageStatus::covered) ++report.stats.covered_count;

    std::set<Seq> cited;
    json evidence = json::array();
    for (const auto* e : graph.evidence_for(skill.skill_id)) {
      job.section.evidence_citations.push_back({e->evidence_id, e->supporting_seqs, e->summary, e->relevance});
      cited.insert(e->supporting_seqs.begin(), e->supporting_seqs.end());
      evidence.push_back(*e);
    }
    if (!job.section.evidence_citations.empty()) {
      json segments = json::array();
      for (Seq s : cited) {
        const auto* seg = session.find_segment(s);
        segments.push_back({{"seq", s}, {"speaker", to_string(seg->speaker)}, {"text", seg->text}});
      }
      job.request = ProviderRequest{Agent::summarize,
                                    {{"section", "skill"},
                                     {"skill", skill},
                                     {"status", to_string(cov[i].status)},
                                     {"evidence", std::move(evidence)},
                                     {"segments", std::move(segments)},
                                     {"notes", related_notes(session, skill, cited)}},
                                    std::string(schema_for(Agent::summarize))};
    }
    jobs.push_back(std::move(job));
  }

  auto run = [&](SectionJob& job) {
    bool fallback = true;
    if (job.request) job.section.narrative = narrative_or_fallback(provider, *job.request, policy, fallback);
    if (fallback) {
      job.section.narrative = fallback_section_narrative(*profile.find_skill(job.section.skill_id),
                                                         job.section.evidence_citations);
    }
    job.section.narrative_fallback = fallback;
  };
  if (config.parallel_sections) {
    std::vector<std::future<void>> pending;
    for (auto& job : jobs) pending.push_back(std::async(std::launch::async, run, std::ref(job)));
    for (auto& f : pending) f.get();
  } else {
    for (auto& job : jobs) run(job);
  }
  for (auto& job : jobs) report.skill_sections.push_back(std::move(job.section));

  bool overall_fallback = true;
  if (report.stats.evidence_count > 0) {
    json cov_json = json::array();
    for (const auto& c : cov) {
      cov_json.push_back({{"skill_id", c.skill_id}, {"name", profile.find_skill(c.skill_id)->name},
                          {"status", to_string(c.status)}, {"evidence_count", c.evidence_count}});
    }
    json summaries = json::array();
    for (const auto& s : report.skill_sections) {
      for (const auto& c : s.evidence_citations) summaries.push_back({{"skill_id", s.skill_id}, {"summary", c.summary}});
    }
    std::vector<std::string> notes;
    for (const auto& n : report.notes_digest) notes.push_back(n.text);
    ProviderRequest request{Agent::summarize,
                            {{"section", "overall"},
                             {"job_title", profile.title},
                             {"coverage", std::move(cov_json)},
                             {"evidence", std::move(summaries)},
                             {"notes", std::move(notes)}},
                            std::string(schema_for(Agent::summarize))};
    report.overall = narrative_or_fallback(provider, request, policy, overall_fallback);
  }
  if (overall_fallback) report.overall = fallback_overall_narrative(report);
  report.overall_fallback = overall_fallback;
  return report;
}

ReportFormat parse_report_format(std::string_view s) {
  if (s == "json") return ReportFormat::json;
  if (s == "markdown" || s == "md") return ReportFormat::markdown;
  throw Error(ErrorCode::invalid_config, "format must be json or markdown, got '" + std::string(s) + "'");
}

namespace {

std::string status_label(CoverageStatus s) {
  switch (s) {
    case CoverageStatus::covered: return "covered";
    case CoverageStatus::partially_covered: return "partially covered";
    case CoverageStatus::not_covered: return "not covered";
  }
  return "not covered";
}

std::string render_markdown(const SummaryReport& r) {
  std::ostringstream md;
  md << "# Interview summary: " << r.job_title << "\n\n";
  md << "Session `" << r.session_id << "`: " << r.stats.segment_count << " transcript segments, "
     << r.stats.evidence_count << " evidence items, " << r.stats.covered_count << " of "
     << r.skill_sections.size() << " skills covered.\n\n";
  for (const auto& s : r.skill_sections) {
    md << "## Skill: " << s.skill_name << " (" << status_label(s.status) << ")\n\n";
    md << s.narrative << "\n\n";
    if (s.evidence_citations.empty()) {
      md << "- No evidence recorded.\n";
    }
    for (const auto& c : s.evidence_citations) {
      md << "- [" << c.evidence_id << "] " << c.summary << " (" << to_string(c.relevance) << "; "
         << (c.supporting_seqs.size() == 1 ? "segment " : "segments ") << seq_list(c.supporting_seqs) << ")\n";
    }
    md << "\n";
  }
  md << "## Interviewer notes\n\n";
  if (r.notes_digest.empty()) md << "- None.\n";
  for (const auto& n : r.notes_digest) {
    md << "- " << n.text;
    if (n.anchor_seq) {
      md << " (after segment " << *n.anchor_seq << ")";
    } else {
      md << " (before the first segment)";
    }
    md << "\n";
  }
  md << "\n## Overall assessment\n\n" << r.overall << "\n";
  return md.str();
}

}  // namespace

std::string render_summary(const SummaryReport& report, ReportFormat format) {
  if (format == ReportFormat::markdown) return render_markdown(report);
  return json(report).dump(2) + "\n";
}

SummaryReport parse_summary_json(std::string_view document) {
  return json::parse(document).get<SummaryReport>();
}

}  // namespace copilot
