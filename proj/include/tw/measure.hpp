#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <numbers>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "tw/common.hpp"

namespace tw {

enum class Domain1D { line, circle };
enum class Domain2D { half_plane, closed_disk };

struct Atom1D {
  double position = 0.0;
  double mass = 0.0;
};

struct Atom2D {
  double x1 = 0.0;
  double x2 = 0.0;
  double mass = 0.0;
};

inline double normalize_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(a, two_pi);
  if (r < 0) r += two_pi;
  return r;
}

// ---------------------------------------------------------------------------
// Region: total, deterministic membership tests with half-open conventions,
// [a,b) on the line and Q_I = I x [0,|I|).
// ---------------------------------------------------------------------------
class Region {
 public:
  enum class Kind {
    empty,
    all,
    interval,       // [a,b), dim 1
    arc,            // angles [a, a+len) on the circle, dim 1
    cube,           // I x |I|([0,1)+m), dim 2
    box,            // [a1,b1) x [a2,b2), dim 2
    disk_box,       // Carleson box over an arc, dim 2
    v_region,       // V_I of the cone construction, dim 2
    v_top,          // part of V_I \ Q_I with 8*x2 >= |I|
    v_bottom,       // part of V_I \ Q_I with 8*x2 < |I|
    strip,          // W^k_K = K x [2^-k-1 |K|, 2^-k |K|), dim 2
    half_space_y,   // x2 >= c (or x2 < c), dim 2
    complement,
    intersection,
    union_,
  };

  using Ptr = std::shared_ptr<const Region>;

  int dim() const { return dim_; }
  Kind kind() const { return kind_; }

  static Ptr empty(int dim) { return make(Kind::empty, dim); }
  static Ptr all(int dim) { return make(Kind::all, dim); }

  static Ptr interval(double a, double b) {
    auto r = make(Kind::interval, 1);
    r->a_ = a;
    r->b_ = b;
    return r;
  }

  /// Arc of the circle starting at angle `a` with length `len` (radians).
  static Ptr arc(double a, double len) {
    require(len >= 0.0 && len <= 2.0 * std::numbers::pi + kBoundaryTol, "arc length out of range");
    auto r = make(Kind::arc, 1);
    r->a_ = normalize_angle(a);
    r->b_ = len;
    return r;
  }

  static Ptr carleson_cube(double a, double b, long m = 0) {
    require(b > a, "degenerate interval");
    require(m >= 0, "vertical index must be nonnegative");
    auto r = make(Kind::cube, 2);
    r->a_ = a;
    r->b_ = b;
    r->m_ = m;
    return r;
  }

  static Ptr box(double a1, double b1, double a2, double b2) {
    auto r = make(Kind::box, 2);
    r->a_ = a1;
    r->b_ = b1;
    r->a2_ = a2;
    r->b2_ = b2;
    return r;
  }

  /// Carleson box over an arc: {r e^{i t} : |1-r| <= len, t in arc}.
  static Ptr carleson_box_disk(double a, double len) {
    auto r = make(Kind::disk_box, 2);
    r->a_ = normalize_angle(a);
    r->b_ = len;
    return r;
  }

  static Ptr v_region(double a, double b) {
    auto r = make(Kind::v_region, 2);
    r->a_ = a;
    r->b_ = b;
    return r;
  }

  static Ptr v_top(double a, double b) {
    auto r = make(Kind::v_top, 2);
    r->a_ = a;
    r->b_ = b;
    return r;
  }

  static Ptr v_bottom(double a, double b) {
    auto r = make(Kind::v_bottom, 2);
    r->a_ = a;
    r->b_ = b;
    return r;
  }

  static Ptr strip(double a, double b, int k) {
    require(k >= 0, "strip index must be nonnegative");
    auto r = make(Kind::strip, 2);
    r->a_ = a;
    r->b_ = b;
    r->m_ = k;
    return r;
  }

  static Ptr half_space_y(double c, bool ge) {
    auto r = make(Kind::half_space_y, 2);
    r->a_ = c;
    r->m_ = ge ? 1 : 0;
    return r;
  }

  static Ptr complement(Ptr inner) {
    auto r = make(Kind::complement, inner->dim());
    r->children_.push_back(std::move(inner));
    return r;
  }

  static Ptr intersect(std::vector<Ptr> parts) {
    require(!parts.empty(), "empty intersection");
    auto r = make(Kind::intersection, parts.front()->dim());
    for (const auto& p : parts) require(p->dim() == r->dim_, "region dimension mismatch");
    r->children_ = std::move(parts);
    return r;
  }

  static Ptr unite(std::vector<Ptr> parts) {
    require(!parts.empty(), "empty union");
    auto r = make(Kind::union_, parts.front()->dim());
    for (const auto& p : parts) require(p->dim() == r->dim_, "region dimension mismatch");
    r->children_ = std::move(parts);
    return r;
  }

  bool contains(double t) const {
    switch (kind_) {
      case Kind::empty: return false;
      case Kind::all: return true;
      case Kind::interval: return t >= a_ && t < b_;
      case Kind::arc: {
        double d = normalize_angle(t - a_);
        return d < b_;
      }
      case Kind::complement: return !children_[0]->contains(t);
      case Kind::intersection:
        for (const auto& c : children_)
          if (!c->contains(t)) return false;
        return true;
      case Kind::union_:
        for (const auto& c : children_)
          if (c->contains(t)) return true;
        return false;
      default: throw std::invalid_argument("1d membership on a 2d region");
    }
  }

  bool contains(const Point2& p) const {
    switch (kind_) {
      case Kind::empty: return false;
      case Kind::all: return true;
      case Kind::cube: {
        const double len = b_ - a_;
        return p.x1 >= a_ && p.x1 < b_ && p.x2 >= len * m_ && p.x2 < len * (m_ + 1);
      }
      case Kind::box: return p.x1 >= a_ && p.x1 < b_ && p.x2 >= a2_ && p.x2 < b2_;
      case Kind::disk_box: {
        const double r = std::hypot(p.x1, p.x2);
        if (std::abs(1.0 - r) > b_) return false;
        if (r == 0.0) return false;
        double ang = normalize_angle(std::atan2(p.x2, p.x1) - a_);
        return ang < b_;
      }
      case Kind::v_region: return dist_to_interval(p.x1, a_, b_) < p.x2;
      case Kind::v_top: {
        if (!(dist_to_interval(p.x1, a_, b_) < p.x2)) return false;
        if (in_cube(p)) return false;
        return 8.0 * p.x2 >= (b_ - a_);
      }
      case Kind::v_bottom: {
        if (!(dist_to_interval(p.x1, a_, b_) < p.x2)) return false;
        if (in_cube(p)) return false;
        return 8.0 * p.x2 < (b_ - a_);
      }
      case Kind::strip: {
        const double len = b_ - a_;
        const double hi = std::ldexp(len, -static_cast<int>(m_));
        return p.x1 >= a_ && p.x1 < b_ && p.x2 >= 0.5 * hi && p.x2 < hi;
      }
      case Kind::half_space_y: return m_ ? (p.x2 >= a_) : (p.x2 < a_);
      case Kind::complement: return !children_[0]->contains(p);
      case Kind::intersection:
        for (const auto& c : children_)
          if (!c->contains(p)) return false;
        return true;
      case Kind::union_:
        for (const auto& c : children_)
          if (c->contains(p)) return true;
        return false;
      default: throw std::invalid_argument("2d membership on a 1d region");
    }
  }

 private:
  bool in_cube(const Point2& p) const {
    return p.x1 >= a_ && p.x1 < b_ && p.x2 >= 0.0 && p.x2 < (b_ - a_);
  }

  static std::shared_ptr<Region> make(Kind k, int dim) {
    auto r = std::make_shared<Region>();
    r->kind_ = k;
    r->dim_ = dim;
    return r;
  }

  Kind kind_ = Kind::empty;
  int dim_ = 1;
  double a_ = 0.0, b_ = 0.0, a2_ = 0.0, b2_ = 0.0;
  long m_ = 0;
  std::vector<Ptr> children_;

 public:
  Region() = default;
};

// ---------------------------------------------------------------------------
// Finitely atomic measures. Atoms are sorted on construction and duplicates
// (within 1e-12) merged; instances are immutable afterwards.
// ---------------------------------------------------------------------------
class Measure1D {
 public:
  Measure1D() = default;
  Measure1D(Domain1D domain, std::vector<Atom1D> atoms) : domain_(domain) {
    for (auto& a : atoms) {
      require(std::isfinite(a.position), "atom position must be finite");
      require(a.mass >= 0.0, "atom mass must be nonnegative");
      if (domain_ == Domain1D::circle) a.position = normalize_angle(a.position);
    }
    std::sort(atoms.begin(), atoms.end(),
              [](const Atom1D& x, const Atom1D& y) { return x.position < y.position; });
    for (const auto& a : atoms) {
      if (!atoms_.empty() && a.position - atoms_.back().position <= kMergeTol)
        atoms_.back().mass += a.mass;
      else
        atoms_.push_back(a);
    }
    prefix_.resize(atoms_.size() + 1, 0.0);
    for (size_t i = 0; i < atoms_.size(); ++i) prefix_[i + 1] = prefix_[i] + atoms_[i].mass;
  }

  Domain1D domain() const { return domain_; }
  const std::vector<Atom1D>& atoms() const { return atoms_; }
  size_t size() const { return atoms_.size(); }
  double total_mass() const { return prefix_.back(); }
  bool empty_support() const { return total_mass() == 0.0; }

  /// Mass carried by [a,b).
  double mass_in(double a, double b) const {
    if (atoms_.empty() || b <= a) return 0.0;
    const auto lo = std::lower_bound(atoms_.begin(), atoms_.end(), a,
                                     [](const Atom1D& at, double v) { return at.position < v; });
    const auto hi = std::lower_bound(atoms_.begin(), atoms_.end(), b,
                                     [](const Atom1D& at, double v) { return at.position < v; });
    return prefix_[hi - atoms_.begin()] - prefix_[lo - atoms_.begin()];
  }

  /// Index range [first,last) of atoms with position in [a,b).
  std::pair<size_t, size_t> range_in(double a, double b) const {
    const auto lo = std::lower_bound(atoms_.begin(), atoms_.end(), a,
                                     [](const Atom1D& at, double v) { return at.position < v; });
    const auto hi = std::lower_bound(atoms_.begin(), atoms_.end(), b,
                                     [](const Atom1D& at, double v) { return at.position < v; });
    return {static_cast<size_t>(lo - atoms_.begin()), static_cast<size_t>(hi - atoms_.begin())};
  }

 private:
  Domain1D domain_ = Domain1D::line;
  std::vector<Atom1D> atoms_;
  std::vector<double> prefix_;
};

class Measure2D {
 public:
  Measure2D() = default;
  Measure2D(Domain2D domain, std::vector<Atom2D> atoms) : domain_(domain) {
    for (const auto& a : atoms) {
      require(std::isfinite(a.x1) && std::isfinite(a.x2), "atom coordinates must be finite");
      require(a.mass >= 0.0, "atom mass must be nonnegative");
      if (domain_ == Domain2D::half_plane)
        require(a.x2 >= 0.0, "half-plane atom below the axis");
      else
        require(std::hypot(a.x1, a.x2) <= 1.0 + kBoundaryTol, "disk atom outside the closed disk");
    }
    std::sort(atoms.begin(), atoms.end(), [](const Atom2D& x, const Atom2D& y) {
      return x.x1 != y.x1 ? x.x1 < y.x1 : x.x2 < y.x2;
    });
    for (const auto& a : atoms) {
      if (!atoms_.empty() && a.x1 - atoms_.back().x1 <= kMergeTol &&
          std::abs(a.x2 - atoms_.back().x2) <= kMergeTol)
        atoms_.back().mass += a.mass;
      else
        atoms_.push_back(a);
    }
    total_ = 0.0;
    for (const auto& a : atoms_) total_ += a.mass;
  }

  Domain2D domain() const { return domain_; }
  const std::vector<Atom2D>& atoms() const { return atoms_; }
  size_t size() const { return atoms_.size(); }
  double total_mass() const { return total_; }
  bool empty_support() const { return total_ == 0.0; }

  /// Mass in [a1,b1) x [a2,b2).
  double mass_in_box(double a1, double b1, double a2, double b2) const {
    double s = 0.0;
    const auto lo = std::lower_bound(atoms_.begin(), atoms_.end(), a1,
                                     [](const Atom2D& at, double v) { return at.x1 < v; });
    for (auto it = lo; it != atoms_.end() && it->x1 < b1; ++it)
      if (it->x2 >= a2 && it->x2 < b2) s += it->mass;
    return s;
  }

  std::pair<size_t, size_t> range_in_x1(double a, double b) const {
    const auto lo = std::lower_bound(atoms_.begin(), atoms_.end(), a,
                                     [](const Atom2D& at, double v) { return at.x1 < v; });
    const auto hi = std::lower_bound(atoms_.begin(), atoms_.end(), b,
                                     [](const Atom2D& at, double v) { return at.x1 < v; });
    return {static_cast<size_t>(lo - atoms_.begin()), static_cast<size_t>(hi - atoms_.begin())};
  }

 private:
  Domain2D domain_ = Domain2D::half_plane;
  std::vector<Atom2D> atoms_;
  double total_ = 0.0;
};

// ---------------------------------------------------------------------------
// Set-restricted mass computations
// ---------------------------------------------------------------------------
inline double total_mass_on(const Measure1D& m, const Region::Ptr& r) {
  require(r->dim() == 1, "domain mismatch: 1d measure with 2d region");
  double s = 0.0;
  for (const auto& a : m.atoms())
    if (r->contains(a.position)) s += a.mass;
  return s;
}

inline double total_mass_on(const Measure2D& m, const Region::Ptr& r) {
  require(r->dim() == 2, "domain mismatch: 2d measure with 1d region");
  double s = 0.0;
  for (const auto& a : m.atoms())
    if (r->contains(Point2{a.x1, a.x2})) s += a.mass;
  return s;
}

inline Measure1D restrict(const Measure1D& m, const Region::Ptr& r) {
  require(r->dim() == 1, "domain mismatch: 1d measure with 2d region");
  std::vector<Atom1D> kept;
  for (const auto& a : m.atoms())
    if (r->contains(a.position)) kept.push_back(a);
  return Measure1D(m.domain(), std::move(kept));
}

inline Measure2D restrict(const Measure2D& m, const Region::Ptr& r) {
  require(r->dim() == 2, "domain mismatch: 2d measure with 1d region");
  std::vector<Atom2D> kept;
  for (const auto& a : m.atoms())
    if (r->contains(Point2{a.x1, a.x2})) kept.push_back(a);
  return Measure2D(m.domain(), std::move(kept));
}

template <typename Density>
Measure1D reweight(const Measure1D& m, Density&& density) {
  std::vector<Atom1D> out;
  out.reserve(m.size());
  for (const auto& a : m.atoms()) {
    const double d = density(a.position);
    require(std::isfinite(d) && d >= 0.0, "density must be nonnegative and finite");
    out.push_back({a.position, a.mass * d});
  }
  return Measure1D(m.domain(), std::move(out));
}

template <typename Density>
Measure2D reweight(const Measure2D& m, Density&& density) {
  std::vector<Atom2D> out;
  out.reserve(m.size());
  for (const auto& a : m.atoms()) {
    const double d = density(Point2{a.x1, a.x2});
    require(std::isfinite(d) && d >= 0.0, "density must be nonnegative and finite");
    out.push_back({a.x1, a.x2, a.mass * d});
  }
  return Measure2D(m.domain(), std::move(out));
}

/// Push-forward through a point map; the target domain is the closed disk
/// unless stated otherwise. Coincident images merge (constructor invariant).
template <typename Map>
Measure2D push_forward(const Measure2D& m, Map&& map, Domain2D target = Domain2D::closed_disk) {
  std::vector<Atom2D> out;
  out.reserve(m.size());
  for (const auto& a : m.atoms()) {
    Point2 q = map(Point2{a.x1, a.x2});
    if (target == Domain2D::closed_disk) {
      const double r = std::hypot(q.x1, q.x2);
      require(r <= 1.0 + 1e-12, "push-forward image escapes the closed disk");
      if (r > 1.0) {  // pull boundary-rounding back onto the circle
        q.x1 /= r;
        q.x2 /= r;
      }
    } else {
      require(q.x2 >= -1e-12, "push-forward image escapes the half-plane");
      q.x2 = std::max(q.x2, 0.0);
    }
    out.push_back({q.x1, q.x2, a.mass});
  }
  return Measure2D(target, std::move(out));
}

// ---------------------------------------------------------------------------
// Serialization: JSON objects and one-atom-per-row CSV
// ---------------------------------------------------------------------------
inline nlohmann::json to_json(const Measure1D& m) {
  nlohmann::json atoms = nlohmann::json::array();
  for (const auto& a : m.atoms()) atoms.push_back({a.position, a.mass});
  return {{"domain", m.domain() == Domain1D::line ? "line" : "circle"}, {"atoms", atoms}};
}

inline nlohmann::json to_json(const Measure2D& m) {
  nlohmann::json atoms = nlohmann::json::array();
  for (const auto& a : m.atoms()) atoms.push_back({a.x1, a.x2, a.mass});
  return {{"domain", m.domain() == Domain2D::half_plane ? "half-plane" : "disk"}, {"atoms", atoms}};
}

inline Measure1D measure1d_from_json(const nlohmann::json& j) {
  const std::string d = j.at("domain").get<std::string>();
  require(d == "line" || d == "circle", "unknown 1d measure domain: " + d);
  std::vector<Atom1D> atoms;
  for (const auto& a : j.at("atoms")) atoms.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
  return Measure1D(d == "line" ? Domain1D::line : Domain1D::circle, std::move(atoms));
}

inline Measure2D measure2d_from_json(const nlohmann::json& j) {
  const std::string d = j.at("domain").get<std::string>();
  require(d == "half-plane" || d == "disk", "unknown 2d measure domain: " + d);
  std::vector<Atom2D> atoms;
  for (const auto& a : j.at("atoms"))
    atoms.push_back({a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()});
  return Measure2D(d == "half-plane" ? Domain2D::half_plane : Domain2D::closed_disk,
                   std::move(atoms));
}

inline std::vector<std::vector<double>> parse_csv_rows(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

inline Measure1D measure1d_from_csv(std::istream& in, Domain1D domain = Domain1D::line) {
  std::vector<Atom1D> atoms;
  for (const auto& row : parse_csv_rows(in)) {
    require(row.size() == 2, "1d CSV atom rows are position,mass");
    atoms.push_back({row[0], row[1]});
  }
  return Measure1D(domain, std::move(atoms));
}

inline Measure2D measure2d_from_csv(std::istream& in, Domain2D domain = Domain2D::half_plane) {
  std::vector<Atom2D> atoms;
  for (const auto& row : parse_csv_rows(in)) {
    require(row.size() == 3, "2d CSV atom rows are x1,x2,mass");
    atoms.push_back({row[0], row[1], row[2]});
  }
  return Measure2D(domain, std::move(atoms));
}

}  // namespace tw
