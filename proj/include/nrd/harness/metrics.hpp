// metrics.hpp - spatial summary statistics over a snapshot, used to compare
// equilibria across parameter settings and horizons.
#pragma once

#include <span>
#include <vector>

#include "nrd/harness/snapshot.hpp"

namespace nrd::harness {

// Spearman rank correlation with average ranks for ties. NaN when either
// input is constant or fewer than two points are given.
double spearman(std::span<const double> x, std::span<const double> y);

double weighted_mean(std::span<const double> values, std::span<const double> weights);
double weighted_variance(std::span<const double> values, std::span<const double> weights);

// Correlation between amenity score and expected mean endowment over
// populated housing sites.
double amenity_endowment_spearman(const std::vector<SiteSnapshot>& rows);

// Population-weighted mean amenity score over housing sites.
double population_weighted_amenity(const std::vector<SiteSnapshot>& rows);

// Population-weighted variance of expected mean endowment over populated
// housing sites.
double segregation_index(const std::vector<SiteSnapshot>& rows);

struct DecileContrast {
  double bottom_amenity = 0.0;  // poorest decile of expected population
  double top_amenity = 0.0;     // richest decile of expected population
};

// Populated housing sites ranked by expected mean endowment; each end takes
// sites until a tenth of the expected population is covered (at least one
// site). Returns the population-weighted mean amenity score of each end.
DecileContrast endowment_decile_amenity(const std::vector<SiteSnapshot>& rows);

// Share of expected population living on the ceil(fraction * |H|) housing
// sites with the highest amenity score (ties broken by site id).
double core_population_share(const std::vector<SiteSnapshot>& rows, double fraction = 0.1);

}  // namespace nrd::harness
