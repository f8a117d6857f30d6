#pragma once

#include <Eigen/Dense>
#include <complex>

#include "illposed/operators.hpp"
#include "illposed/types.hpp"

namespace ip::freq {

// Unnormalized forward 2D DFT of an image (the inverse used internally
// carries the 1/n factor). Exposed so spectral identities are testable.
Eigen::MatrixXcd fft2_forward(const ImageGrid& img);

// Deconvolution under periodic boundary assumptions:
//   X = F^-1[ conj(F(H)) .* F(Y) ./ (|F(H)|^2 + lambda^2) ]
// where H is the blur kernel embedded at the origin with circular wraparound.
// Matches the dense Tikhonov solve against the periodic convolution matrix.
ImageGrid fft_tikhonov(const ImageGrid& Y, const ops::Psf& psf, double lambda);

// Same spectral division with a noise-to-signal floor instead of lambda^2:
//   X = F^-1[ conj(F(H)) .* F(Y) ./ (|F(H)|^2 + nsr) ]
// nsr = 0 demands an invertible spectrum and performs exact inversion.
ImageGrid wiener_nsr(const ImageGrid& Y, const ops::Psf& psf, double nsr);

}  // namespace ip::freq
