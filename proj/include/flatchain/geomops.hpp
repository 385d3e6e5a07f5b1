#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "flatchain/chain.hpp"

namespace flatchain {

/// Simplex-wise affine map from a complex into R^N, given by vertex images.
class PLMap {
public:
    PLMap(std::shared_ptr<const Complex> source, int target_dim, std::vector<double> images);

    const Complex& source() const { return *source_; }
    const std::shared_ptr<const Complex>& source_ptr() const { return source_; }
    int target_dim() const { return n_; }
    std::span<const double> image(std::size_t v) const { return {images_.data() + v * n_, static_cast<std::size_t>(n_)}; }
    /// Largest operator norm of the affine part over the maximal cells.
    double lipschitz() const { return lambda_; }

private:
    std::shared_ptr<const Complex> source_;
    int n_;
    std::vector<double> images_;
    double lambda_ = 0;
};

/// Complex of all nondegenerate image cells of f (coincident image vertices
/// merged), a common target for pushing forward several chains.
std::shared_ptr<const Complex> image_complex(const PLMap& f);

/// f_* S. Without a target the image cells form a new complex (coincident
/// image vertices merged); with one, every nondegenerate image cell must be
/// a cell of the target, else InputError. Cells whose image has lower
/// dimension contribute nothing.
Chain pushforward(const PLMap& f, const Chain& s, std::shared_ptr<const Complex> target = nullptr);

struct IntersectionResult {
    Chain chain;
    /// Augmentation of a 0-dimensional result; zero otherwise.
    GroupElement index;
    /// Some pair of cells was close to non-transverse.
    bool degenerate = false;
};

/// S cap tau_y R for R over Z, oriented so that (intersection, S-complement,
/// R-complement) is positive in R^d. Supported: dim S + dim R = d (points),
/// and for d = 2 a 2-chain against a 1- or 0-chain.
IntersectionResult intersect_chains(const Chain& s, const Chain& r, std::span<const double> y);

struct IntersectionIndex {
    GroupElement value;
    /// Radius of the ball of offsets at which all samples agreed.
    double radius = 0;
};

/// I(S, R): the common value of chi(S cap tau_y R) over random small y.
/// The radius is halved (at most 30 times) until all samples agree.
/// Throws InputError when the supports violate the hypothesis and
/// DegeneracyError when the samples never stabilise.
IntersectionIndex intersection_index(const Chain& s, const Chain& r, int samples, double radius,
                                     std::uint64_t seed = 1);

}  // namespace flatchain
