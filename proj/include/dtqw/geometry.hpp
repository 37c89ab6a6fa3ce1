#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dtqw {

enum class Spin : int { up = 0, down = 1 };

enum class Boundary { periodic, absorbing_guard };

/// Lattice coordinate in centered convention: x = 0 sits at the
/// middle site, so a 201-site axis spans [-100, 100].
struct Coord {
    int x = 0;
    int y = 0;
};

inline bool operator==(Coord a, Coord b) { return a.x == b.x && a.y == b.y; }

/// Cubic lattice in one or two dimensions with a two-level internal state.
/// Basis ordering is site-major, spin-minor; sites are enumerated row-major
/// over (x, y), i.e. index = (x_i * Ny + y_i) * 2 + spin.
class LatticeGeometry {
  public:
    LatticeGeometry(int dimension, std::vector<int> extent,
                    std::vector<Boundary> boundary = {});

    static LatticeGeometry line(int n_sites, Boundary b = Boundary::periodic);
    static LatticeGeometry plane(int nx, int ny, Boundary b = Boundary::periodic);

    int dimension() const { return dim_; }
    int extent(int axis) const { return extent_.at(axis); }
    Boundary boundary(int axis) const { return boundary_.at(axis); }
    bool any_absorbing() const;

    std::int64_t n_sites() const { return n_sites_; }
    std::int64_t basis_size() const { return 2 * n_sites_; }

    /// Centered coordinate of the lowest-index site along `axis`.
    int coord_min(int axis) const { return -extent_.at(axis) / 2; }
    int coord_max(int axis) const { return extent_.at(axis) - 1 - extent_.at(axis) / 2; }

    std::int64_t site_index(Coord c) const;
    Coord site_coord(std::int64_t site) const;

    std::int64_t basis_index(Coord c, Spin s) const {
        return 2 * site_index(c) + static_cast<int>(s);
    }
    static Spin basis_spin(std::int64_t basis) { return static_cast<Spin>(basis & 1); }
    static std::int64_t basis_site(std::int64_t basis) { return basis >> 1; }

    bool contains(Coord c) const;

    bool operator==(const LatticeGeometry& o) const {
        return dim_ == o.dim_ && extent_ == o.extent_ && boundary_ == o.boundary_;
    }
    bool operator!=(const LatticeGeometry& o) const { return !(*this == o); }

  private:
    int dim_;
    std::vector<int> extent_;
    std::vector<Boundary> boundary_;
    std::int64_t n_sites_;
};

/// A deterministic set of lattice sites.
class Region {
  public:
    Region() = default;
    Region(const LatticeGeometry& g, std::vector<Coord> sites);

    /// All sites of the lattice.
    static Region whole(const LatticeGeometry& g);
    /// 1D interval [lo, hi] in centered coordinates (empty if lo > hi).
    static Region interval(const LatticeGeometry& g, int lo, int hi);
    /// Sites selected by a predicate on centered coordinates.
    template <class Pred>
    static Region from_predicate(const LatticeGeometry& g, Pred&& pred) {
        std::vector<Coord> sites;
        for (std::int64_t s = 0; s < g.n_sites(); ++s) {
            Coord c = g.site_coord(s);
            if (pred(c)) sites.push_back(c);
        }
        return Region(g, std::move(sites));
    }

    const std::vector<Coord>& sites() const { return sites_; }
    const std::vector<std::int64_t>& site_indices() const { return indices_; }
    bool empty() const { return sites_.empty(); }
    std::size_t size() const { return sites_.size(); }
    bool contains(std::int64_t site_index) const;

  private:
    std::vector<Coord> sites_;
    std::vector<std::int64_t> indices_;
    std::vector<char> mask_;
};

}  // namespace dtqw
