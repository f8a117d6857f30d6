#pragma once

#include <cstdint>
#include <string>

#include "illposed/types.hpp"

namespace ip::ops {

enum class BoundaryCondition { zero, replicate, periodic, reflexive };

enum class PsfKind { gaussian_iso, gaussian_aniso, disk, motion };

struct Psf {
    ImageGrid kernel;  // odd height/width, nonnegative, sums to 1
    PsfKind kind = PsfKind::gaussian_iso;
};

struct PsfParams {
    Index size = 3;        // odd
    double sigma_x = 1.0;  // gaussians
    double sigma_y = 1.0;
    double radius = 1.0;     // disk
    double length = 3.0;     // motion
    double angle_deg = 0.0;  // motion
};

Psf psf_build(PsfKind kind, const PsfParams& params);

// 2D convolution, kernel slid in sliding-window orientation: the stored grid
// is paired entry-for-entry with the image window under it,
//   Y(i,j) = sum_{r,c} K(r,c) * X(i + r - cr, j + c - cc),
// with (cr,cc) the kernel center. Flip the grid 180 degrees for the
// textbook flip-and-sum orientation. Out-of-range reads resolve per bc.
ImageGrid conv2d(const ImageGrid& X, const ImageGrid& K, BoundaryCondition bc);
ImageGrid conv2d(const ImageGrid& X, const Psf& H, BoundaryCondition bc);

// Dense matrix M with devectorize(M*vectorize(X)) == conv2d(X,K,bc).
// Guarded to height*width <= 16384 columns.
Matrix conv_matrix(const ImageGrid& K, Index height, Index width, BoundaryCondition bc);
Matrix conv_matrix(const Psf& H, Index height, Index width, BoundaryCondition bc);

// (n/2) x n pair-averaging matrix: row k has 1/2 at columns 2k and 2k+1.
Matrix downsample_matrix(Index n);

// Diagonal 0/1 operator keeping the listed indices. Self-adjoint.
LinearOperator mask_operator(const std::vector<Index>& keep_indices, Index n);

// Noise models. Deterministic per seed via the counter generator below.
struct GaussianNoise { double mean = 0.0; double std = 0.0; };
struct PoissonNoise { double scale = 255.0; };

Vector add_noise(const Vector& y, const GaussianNoise& model, uint64_t seed);
Vector add_noise(const Vector& y, const PoissonNoise& model, uint64_t seed);

// Counter-based generator: SplitMix64's finalizer applied to
// seed + (k+1)*0x9E3779B97F4A7C15. Stateless, so any element of a noise
// field can be produced independently; documented here so streams are
// reproducible. Draw i of a Gaussian field uses counters 2i, 2i+1
// (Box-Muller); Poisson element i uses the counter block [i*4096, (i+1)*4096).
uint64_t counter_value(uint64_t seed, uint64_t k);
double counter_uniform(uint64_t seed, uint64_t k);   // (0,1)
double counter_normal(uint64_t seed, uint64_t pair); // N(0,1), consumes 2 counters

// PGM image I/O, 8-bit, [0,255] <-> [0,1] linear. Reads P2 and P5 (header
// comments allowed); writes P5 with maxval 255.
ImageGrid read_pgm(const std::string& path);
void write_pgm(const std::string& path, const ImageGrid& X);

// Deterministic piecewise test image: background ramp, bright rectangle,
// disk. Values in [0,1].
ImageGrid make_phantom(Index height, Index width);

}  // namespace ip::ops
