#pragma once

#include "greenscan/errors.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace greenscan::stats {

struct PairedSeries {
  std::vector<double> measured;
  std::vector<double> reference;
  std::size_t size() const { return measured.size(); }
  void validate(std::size_t min_size) const;
};

/// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// Two-tailed p-value of Student's t with `df` degrees of freedom.
double student_t_two_tailed(double t, double df);

struct PearsonResult {
  double r = 0.0;
  double p = 1.0;
  std::size_t n = 0;
  bool significant(double alpha = 0.05) const { return p < alpha; }
};

/// Two-tailed p of a sample correlation `r` over `n` pairs.
double pearson_p_value(double r, std::size_t n);

/// Sample Pearson r with a two-tailed p from t = r sqrt((n-2)/(1-r^2)).
/// Throws UndefinedCorrelationError if either series is constant.
PearsonResult pearson(const PairedSeries &series);
PearsonResult pearson(std::span<const double> x, std::span<const double> y);

struct BlandAltmanResult {
  double mean_diff = 0.0;
  double sd_diff = 0.0;
  double upper_loa = 0.0;
  double lower_loa = 0.0;
  std::size_t outside_count = 0;
  std::vector<double> means; ///< per-pair (measured + reference) / 2
  std::vector<double> diffs; ///< per-pair measured - reference
};

inline constexpr double kAgreementZ = 1.96;

BlandAltmanResult bland_altman(const PairedSeries &series);

struct NamedColumn {
  std::string name;
  std::vector<double> values;
};

struct CorrelationMatrix {
  std::vector<std::string> names;
  /// r[i][j]; nullopt where a column is constant.
  std::vector<std::vector<std::optional<double>>> r;
};

CorrelationMatrix correlation_matrix(const std::vector<NamedColumn> &columns);

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  std::optional<double> sd; ///< sample sd; omitted for singleton groups
};

/// Mean and sample sd accumulated over sorted values, so the result does not
/// depend on input order.
Summary summarize(std::vector<double> values);

enum class GroupKey { species, condition, species_condition };

struct AggregateRow {
  std::string species;
  std::string condition;
  double ndvi = 0.0;
  double ctd = 0.0;
};

struct GroupSummary {
  std::string species;   ///< empty when not grouped by species
  std::string condition; ///< empty when not grouped by condition
  Summary ndvi;
  Summary ctd;
};

std::vector<GroupSummary> aggregate_by(const std::vector<AggregateRow> &rows,
                                       GroupKey key);

/// Ordinal encoding of health condition used for correlating CTD.
using OrdinalMap = std::map<std::string, double>;
OrdinalMap default_condition_ordinal();

} // namespace greenscan::stats
