#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gridclear/analysis.hpp"
#include "gridclear/market.hpp"
#include "gridclear/scenario_io.hpp"

namespace gridclear {

enum class ReportFormat { csv, markdown };

/// Two decimals, '.' separator, no locale; negative zero prints as 0.00.
std::string fixed2(double value);
/// Quotes a CSV field when it holds a comma, quote or newline.
std::string csv_field(const std::string& value);

struct ReportFile {
  std::string name;  // file name inside the output directory
  std::string content;
};

std::vector<ReportFile> clear_reports(const Scenario& scenario, const SchemeOutcome& outcome, ReportFormat format,
                                      const std::string& stem);
/// One column per scheme in the order given. Monetary rows of a physically
/// infeasible scheme read "Not Available".
std::vector<ReportFile> compare_reports(const Scenario& scenario, std::span<const SchemeOutcome> outcomes,
                                        ReportFormat format, const std::string& stem);
std::vector<ReportFile> daucruc_reports(const Scenario& scenario, const DaucRucOutcome& outcome, ReportFormat format,
                                        const std::string& stem);
std::vector<ReportFile> bidding_reports(const Scenario& scenario, std::span<const BidDeviation> rows,
                                        ReportFormat format, const std::string& stem);
std::vector<ReportFile> stats_reports(const PriceSeries& series, const PriceSeriesStats& stats, ReportFormat format,
                                      const std::string& stem);

/// Markdown rendering of the comparison table, also printed by the CLI.
std::string compare_table_markdown(const Scenario& scenario, std::span<const SchemeOutcome> outcomes);

/// Writes every file, prefixed with a "# generated <UTC time>" line when
/// timestamp is set. Throws Error(io) for an empty set or an unwritable path.
std::vector<std::filesystem::path> write_reports(const std::filesystem::path& dir, const std::vector<ReportFile>& files,
                                                 bool timestamp);

}  // namespace gridclear
