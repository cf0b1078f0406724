// cost_model.hpp
//
// Affordability P, amenity access L, community ties W and upkeep U, combined
// into c = 1 - P * U * exp(-(lambda * L + (1 - lambda) * W)).
//
// P, U and W are always evaluated against the full enacted profile: resident
// j counts as living at their enacted site, not at the candidate being scored.
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "nrd/population.hpp"
#include "nrd/spatial_graph.hpp"

namespace nrd {

struct ModelParams {
  std::uint32_t rho = 1;  // maximum occupancy per site
  double lambda = 0.5;    // amenity weight; community gets 1 - lambda

  void validate() const;
};

// Enacted housing site (index into Geography housing order) per resident.
struct Profile {
  std::vector<std::uint32_t> site;

  std::size_t num_residents() const { return site.size(); }
};

// Per-site occupant endowments, kept sorted ascending.
class OccupancyIndex {
 public:
  OccupancyIndex() = default;
  OccupancyIndex(std::size_t num_sites) : occupants_(num_sites) {}
  OccupancyIndex(const Profile& profile, const EndowmentProfile& w, std::size_t num_sites);

  void rebuild(const Profile& profile, const EndowmentProfile& w);

  // Relocates one occupant with endowment `endowment`; binary search locates
  // the slot at both ends.
  void move(double endowment, std::uint32_t from, std::uint32_t to);

  std::size_t num_sites() const { return occupants_.size(); }
  std::size_t count(std::size_t h) const { return occupants_[h].size(); }
  std::size_t total() const { return total_; }
  std::span<const double> endowments(std::size_t h) const { return occupants_[h]; }

  // Number of occupants of h whose endowment is strictly greater than w.
  std::size_t richer_than(std::size_t h, double w) const;

  // Endowment of the rho-th richest occupant, or -infinity if fewer than rho
  // occupants. P(j, h) = 1 exactly when this value is not greater than w_j.
  double affordability_threshold(std::size_t h, std::uint32_t rho) const;

 private:
  std::vector<std::vector<double>> occupants_;
  std::size_t total_ = 0;
};

class DegenerateGeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Proximity-squared weighted mean endowment around every housing site.
struct CommunityField {
  std::vector<double> mean;
};

// m(h) = sum_j w_j (1 - ell(h, h_j))^2 / sum_j (1 - ell(h, h_j))^2 over all
// residents. Throws DegenerateGeometryError if a denominator is below 1e-15.
CommunityField community_field(const OccupancyIndex& occ, const Geography& geo);
CommunityField community_field(const Profile& profile, const EndowmentProfile& w,
                               const Geography& geo);

int affordability(std::size_t j, std::size_t h, const OccupancyIndex& occ,
                  const EndowmentProfile& w, std::uint32_t rho);
int upkeep(std::size_t h, const OccupancyIndex& occ);
double community_score(std::size_t j, std::size_t h, const CommunityField& field,
                       const EndowmentProfile& w);

// Combines already evaluated scores.
double combine_cost(int affordable, int upkept, double amenity, double community, double lambda);

// Shared per-step structures; immutable while cost vectors are evaluated.
struct StepFields {
  OccupancyIndex occupancy;
  CommunityField community;
  std::vector<double> threshold;  // affordability_threshold per site
};

class CostModel {
 public:
  CostModel(const Geography& geo, const EndowmentProfile& w, ModelParams params);

  const ModelParams& params() const { return params_; }
  const Geography& geography() const { return *geo_; }
  const EndowmentProfile& endowments() const { return *w_; }
  std::size_t num_sites() const { return geo_->num_housing(); }

  StepFields build_fields(const Profile& profile) const;
  void build_fields(const Profile& profile, StepFields& out) const;

  // Reference path: one candidate, each score evaluated separately.
  double cost(std::size_t j, std::size_t h, const StepFields& fields) const;

  // Fused path over all candidates, written into out (size |H|).
  void cost_vector(std::size_t j, const StepFields& fields, std::span<double> out) const;
  std::vector<double> cost_vector(std::size_t j, const StepFields& fields) const;

 private:
  const Geography* geo_;
  const EndowmentProfile* w_;
  ModelParams params_;
  std::vector<double> amenity_factor_;  // exp(-lambda * L(h))
};

}  // namespace nrd
