#include "dtqw/geometry.hpp"

#include <algorithm>

namespace dtqw {

LatticeGeometry::LatticeGeometry(int dimension, std::vector<int> extent,
                                 std::vector<Boundary> boundary)
    : dim_(dimension), extent_(std::move(extent)), boundary_(std::move(boundary)) {
    if (dim_ != 1 && dim_ != 2)
        throw std::invalid_argument("LatticeGeometry: dimension must be 1 or 2");
    if (static_cast<int>(extent_.size()) != dim_)
        throw std::invalid_argument("LatticeGeometry: extent size must match dimension");
    for (int e : extent_)
        if (e < 2) throw std::invalid_argument("LatticeGeometry: every extent must be >= 2");
    if (boundary_.empty()) boundary_.assign(dim_, Boundary::periodic);
    if (static_cast<int>(boundary_.size()) != dim_)
        throw std::invalid_argument("LatticeGeometry: boundary size must match dimension");
    n_sites_ = 1;
    for (int e : extent_) n_sites_ *= e;
}

LatticeGeometry LatticeGeometry::line(int n_sites, Boundary b) {
    return LatticeGeometry(1, {n_sites}, {b});
}

LatticeGeometry LatticeGeometry::plane(int nx, int ny, Boundary b) {
    return LatticeGeometry(2, {nx, ny}, {b, b});
}

bool LatticeGeometry::any_absorbing() const {
    return std::any_of(boundary_.begin(), boundary_.end(),
                       [](Boundary b) { return b == Boundary::absorbing_guard; });
}

std::int64_t LatticeGeometry::site_index(Coord c) const {
    int ix = c.x - coord_min(0);
    if (ix < 0 || ix >= extent_[0])
        throw std::out_of_range("site_index: x coordinate outside lattice");
    if (dim_ == 1) return ix;
    int iy = c.y - coord_min(1);
    if (iy < 0 || iy >= extent_[1])
        throw std::out_of_range("site_index: y coordinate outside lattice");
    return static_cast<std::int64_t>(ix) * extent_[1] + iy;
}

Coord LatticeGeometry::site_coord(std::int64_t site) const {
    if (site < 0 || site >= n_sites_) throw std::out_of_range("site_coord: bad site index");
    Coord c;
    if (dim_ == 1) {
        c.x = static_cast<int>(site) + coord_min(0);
    } else {
        c.x = static_cast<int>(site / extent_[1]) + coord_min(0);
        c.y = static_cast<int>(site % extent_[1]) + coord_min(1);
    }
    return c;
}

bool LatticeGeometry::contains(Coord c) const {
    if (c.x < coord_min(0) || c.x > coord_max(0)) return false;
    if (dim_ == 2 && (c.y < coord_min(1) || c.y > coord_max(1))) return false;
    return true;
}

Region::Region(const LatticeGeometry& g, std::vector<Coord> sites) : sites_(std::move(sites)) {
    indices_.reserve(sites_.size());
    mask_.assign(g.n_sites(), 0);
    for (const Coord& c : sites_) {
        if (!g.contains(c)) throw std::invalid_argument("Region: site outside lattice");
        std::int64_t idx = g.site_index(c);
        if (!mask_[idx]) {
            mask_[idx] = 1;
            indices_.push_back(idx);
        }
    }
}

Region Region::whole(const LatticeGeometry& g) {
    std::vector<Coord> sites;
    sites.reserve(g.n_sites());
    for (std::int64_t s = 0; s < g.n_sites(); ++s) sites.push_back(g.site_coord(s));
    return Region(g, std::move(sites));
}

Region Region::interval(const LatticeGeometry& g, int lo, int hi) {
    if (g.dimension() != 1)
        throw std::invalid_argument("Region::interval: 1D lattices only");
    std::vector<Coord> sites;
    for (int x = std::max(lo, g.coord_min(0)); x <= std::min(hi, g.coord_max(0)); ++x)
        sites.push_back({x, 0});
    return Region(g, std::move(sites));
}

bool Region::contains(std::int64_t site_index) const {
    if (site_index < 0 || site_index >= static_cast<std::int64_t>(mask_.size())) return false;
    return mask_[site_index] != 0;
}

}  // namespace dtqw
