#include "nrd/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace nrd {

void ModelParams::validate() const {
  if (rho < 1) throw std::invalid_argument("rho must be at least 1");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must lie in [0, 1]");
}

OccupancyIndex::OccupancyIndex(const Profile& profile, const EndowmentProfile& w,
                               std::size_t num_sites)
    : occupants_(num_sites) {
  rebuild(profile, w);
}

void OccupancyIndex::rebuild(const Profile& profile, const EndowmentProfile& w) {
  if (profile.num_residents() != w.size()) {
    throw std::invalid_argument("profile and endowments disagree on resident count");
  }
  for (auto& v : occupants_) v.clear();
  // Endowments increase with resident index, so appending in index order
  // keeps each site's list sorted.
  for (std::size_t j = 0; j < profile.site.size(); ++j) {
    occupants_.at(profile.site[j]).push_back(w[j]);
  }
  total_ = profile.site.size();
}

void OccupancyIndex::move(double endowment, std::uint32_t from, std::uint32_t to) {
  auto& src = occupants_.at(from);
  auto it = std::lower_bound(src.begin(), src.end(), endowment);
  if (it == src.end() || *it != endowment) {
    throw std::invalid_argument("move: resident not present at source site");
  }
  src.erase(it);
  auto& dst = occupants_.at(to);
  dst.insert(std::upper_bound(dst.begin(), dst.end(), endowment), endowment);
}

std::size_t OccupancyIndex::richer_than(std::size_t h, double w) const {
  const auto& v = occupants_[h];
  return static_cast<std::size_t>(v.end() - std::upper_bound(v.begin(), v.end(), w));
}

double OccupancyIndex::affordability_threshold(std::size_t h, std::uint32_t rho) const {
  const auto& v = occupants_[h];
  if (v.size() < rho) return -std::numeric_limits<double>::infinity();
  return v[v.size() - rho];
}

CommunityField community_field(const OccupancyIndex& occ, const Geography& geo) {
  const std::size_t nh = geo.num_housing();
  if (occ.total() == 0) throw std::invalid_argument("community_field: no residents");

  std::vector<std::size_t> occupied;
  std::vector<double> mass, wealth;
  for (std::size_t h = 0; h < nh; ++h) {
    if (occ.count(h) == 0) continue;
    occupied.push_back(h);
    mass.push_back(static_cast<double>(occ.count(h)));
    double s = 0.0;
    for (double x : occ.endowments(h)) s += x;
    wealth.push_back(s);
  }

  CommunityField field;
  field.mean.resize(nh);
  for (std::size_t h = 0; h < nh; ++h) {
    const double* row = geo.proximity_sq.data() + h * nh;
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < occupied.size(); ++k) {
      const double s2 = row[occupied[k]];
      num += wealth[k] * s2;
      den += mass[k] * s2;
    }
    if (den < 1e-15) {
      throw DegenerateGeometryError("community field denominator vanishes at site " +
                                    geo.housing_node(h).id);
    }
    field.mean[h] = num / den;
  }
  return field;
}

CommunityField community_field(const Profile& profile, const EndowmentProfile& w,
                               const Geography& geo) {
  return community_field(OccupancyIndex(profile, w, geo.num_housing()), geo);
}

int affordability(std::size_t j, std::size_t h, const OccupancyIndex& occ,
                  const EndowmentProfile& w, std::uint32_t rho) {
  return occ.richer_than(h, w[j]) < rho ? 1 : 0;
}

int upkeep(std::size_t h, const OccupancyIndex& occ) { return occ.count(h) > 0 ? 1 : 0; }

double community_score(std::size_t j, std::size_t h, const CommunityField& field,
                       const EndowmentProfile& w) {
  return 1.0 - std::abs(w[j] - field.mean[h]);
}

double combine_cost(int affordable, int upkept, double amenity, double community, double lambda) {
  if (affordable == 0 || upkept == 0) return 1.0;
  return 1.0 - std::exp(-(lambda * amenity + (1.0 - lambda) * community));
}

CostModel::CostModel(const Geography& geo, const EndowmentProfile& w, ModelParams params)
    : geo_(&geo), w_(&w), params_(params) {
  params_.validate();
  amenity_factor_.resize(geo.num_housing());
  for (std::size_t h = 0; h < geo.num_housing(); ++h) {
    amenity_factor_[h] = std::exp(-params_.lambda * geo.amenity_scores[h]);
  }
}

StepFields CostModel::build_fields(const Profile& profile) const {
  StepFields f;
  build_fields(profile, f);
  return f;
}

void CostModel::build_fields(const Profile& profile, StepFields& out) const {
  const std::size_t nh = num_sites();
  if (out.occupancy.num_sites() != nh) out.occupancy = OccupancyIndex(nh);
  out.occupancy.rebuild(profile, *w_);
  out.community = community_field(out.occupancy, *geo_);
  out.threshold.resize(nh);
  for (std::size_t h = 0; h < nh; ++h) {
    out.threshold[h] = out.occupancy.affordability_threshold(h, params_.rho);
  }
}

double CostModel::cost(std::size_t j, std::size_t h, const StepFields& fields) const {
  const int p = affordability(j, h, fields.occupancy, *w_, params_.rho);
  const int u = upkeep(h, fields.occupancy);
  const double l = geo_->amenity_scores[h];
  const double c = community_score(j, h, fields.community, *w_);
  return combine_cost(p, u, l, c, params_.lambda);
}

void CostModel::cost_vector(std::size_t j, const StepFields& fields, std::span<double> out) const {
  const std::size_t nh = num_sites();
  const double wj = (*w_)[j];
  const double community_weight = 1.0 - params_.lambda;
  const double* mean = fields.community.mean.data();
  const double* threshold = fields.threshold.data();
  const double* amenity = amenity_factor_.data();
  for (std::size_t h = 0; h < nh; ++h) {
    // An empty site has threshold -inf, so only U needs its own test.
    if (threshold[h] > wj || fields.occupancy.count(h) == 0) {
      out[h] = 1.0;
      continue;
    }
    const double community = 1.0 - std::abs(wj - mean[h]);
    out[h] = 1.0 - amenity[h] * std::exp(-community_weight * community);
  }
}

std::vector<double> CostModel::cost_vector(std::size_t j, const StepFields& fields) const {
  std::vector<double> out(num_sites());
  cost_vector(j, fields, out);
  return out;
}

}  // namespace nrd
