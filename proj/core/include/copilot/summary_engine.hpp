#pragma once

#include <string>
#include <string_view>

#include "copilot/provider.hpp"
#include "copilot/session.hpp"
#include "copilot/summary.hpp"

namespace copilot {

struct SummaryConfig {
  // Issue the per-skill provider calls concurrently.
  bool parallel_sections = true;
};

// Builds the report for an ended session. Sections, citations, notes and
// stats are computed here; only narrative text comes from the provider, and a
// provider failure swaps in the fallback narrative for that part. Sections
// without evidence, and the overall paragraph of a session without evidence,
// use the fallback directly. Throws wrong_state unless the session is ended.
SummaryReport generate_summary(const Session& session, ModelProvider& provider, const InvokePolicy& policy,
                               Millis generated_at, const SummaryConfig& config = {});

// Fallback narratives; also what tests compare degraded reports against.
std::string fallback_section_narrative(const Skill& skill, const std::vector<EvidenceCitation>& citations);
std::string fallback_overall_narrative(const SummaryReport& partial_report);

enum class ReportFormat { json, markdown };
ReportFormat parse_report_format(std::string_view s);

// json: canonical serialization (sorted keys, 2-space indent).
// markdown: one "## Skill: " heading per section in order, then notes, then
// the overall paragraph; every evidence line cites its segment seqs.
std::string render_summary(const SummaryReport& report, ReportFormat format);
SummaryReport parse_summary_json(std::string_view document);

}  // namespace copilot
