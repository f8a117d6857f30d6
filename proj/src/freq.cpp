#include "illposed/freq.hpp"

#include <fftw3.h>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace ip::freq {

namespace {

using Cplx = std::complex<double>;

// Row-major h x w complex transform. FFTW computes unnormalized sums both
// ways; the inverse path divides by h*w afterwards.
std::vector<Cplx> dft2(const std::vector<Cplx>& in, Index h, Index w, bool inverse) {
    std::vector<Cplx> out(in.size());
    // fftw_complex and std::complex<double> share layout by the C++ standard's
    // array-of-two-doubles guarantee.
    auto* src = reinterpret_cast<fftw_complex*>(const_cast<Cplx*>(in.data()));
    auto* dst = reinterpret_cast<fftw_complex*>(out.data());
    fftw_plan plan = fftw_plan_dft_2d((int)h, (int)w, src, dst,
                                      inverse ? FFTW_BACKWARD : FFTW_FORWARD,
                                      FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
    if (!plan) throw std::runtime_error("dft2: fftw plan creation failed");
    fftw_execute(plan);
    fftw_destroy_plan(plan);
    if (inverse) {
        const double scale = 1.0 / (double)(h * w);
        for (auto& v : out) v *= scale;
    }
    return out;
}

std::vector<Cplx> to_complex(const ImageGrid& img) {
    std::vector<Cplx> v(img.data.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = Cplx(img.data[i], 0.0);
    return v;
}

// Embeds the kernel with its center at index (0,0), wrapping negatives
// circularly. The stored kernel grids are slid (correlated) across the image
// by conv2d, so the equivalent true-convolution kernel is the 180 degree
// rotation; that is what belongs in the spectral formula.
std::vector<Cplx> pad_kernel(const ops::Psf& psf, Index h, Index w) {
    const auto& K = psf.kernel;
    const Index kh = K.height, kw = K.width;
    if (kh > h || kw > w)
        throw std::invalid_argument("pad_kernel: kernel larger than image");
    const Index cr = kh / 2, cc = kw / 2;
    std::vector<Cplx> p((std::size_t)(h * w), Cplx(0.0, 0.0));
    for (Index r = 0; r < kh; ++r)
        for (Index c = 0; c < kw; ++c) {
            const double g = K(kh - 1 - r, kw - 1 - c);  // rotated entry
            Index pr = ((r - cr) % h + h) % h;
            Index pc = ((c - cc) % w + w) % w;
            p[(std::size_t)(pr * w + pc)] += g;
        }
    return p;
}

ImageGrid spectral_divide(const ImageGrid& Y, const ops::Psf& psf, double floor_term) {
    const Index h = Y.height, w = Y.width;
    if (h < 1 || w < 1) throw std::invalid_argument("spectral_divide: empty image");
    std::vector<Cplx> Hf = dft2(pad_kernel(psf, h, w), h, w, false);
    std::vector<Cplx> Yf = dft2(to_complex(Y), h, w, false);
    for (std::size_t i = 0; i < Yf.size(); ++i) {
        const double mag2 = std::norm(Hf[i]);
        const double denom = mag2 + floor_term;
        if (denom <= 0.0 || !std::isfinite(1.0 / denom))
            throw std::domain_error("spectral_divide: kernel spectrum vanishes and no floor is set");
        Yf[i] = std::conj(Hf[i]) * Yf[i] / denom;
    }
    std::vector<Cplx> xc = dft2(Yf, h, w, true);

    double max_re = 0.0, max_im = 0.0;
    for (const auto& v : xc) {
        max_re = std::max(max_re, std::abs(v.real()));
        max_im = std::max(max_im, std::abs(v.imag()));
    }
    // Real input and a real kernel must come back real up to roundoff.
    if (max_im > 1e-8 * (1.0 + max_re))
        throw std::domain_error("spectral_divide: imaginary residue exceeds tolerance");

    ImageGrid out(h, w);
    for (std::size_t i = 0; i < xc.size(); ++i) out.data[i] = xc[i].real();
    return out;
}

}  // namespace

Eigen::MatrixXcd fft2_forward(const ImageGrid& img) {
    std::vector<Cplx> f = dft2(to_complex(img), img.height, img.width, false);
    Eigen::MatrixXcd M(img.height, img.width);
    for (Index i = 0; i < img.height; ++i)
        for (Index j = 0; j < img.width; ++j) M(i, j) = f[(std::size_t)(i * img.width + j)];
    return M;
}

ImageGrid fft_tikhonov(const ImageGrid& Y, const ops::Psf& psf, double lambda) {
    if (lambda < 0.0) throw std::invalid_argument("fft_tikhonov: negative lambda");
    return spectral_divide(Y, psf, lambda * lambda);
}

ImageGrid wiener_nsr(const ImageGrid& Y, const ops::Psf& psf, double nsr) {
    if (nsr < 0.0) throw std::invalid_argument("wiener_nsr: negative noise-to-signal ratio");
    return spectral_divide(Y, psf, nsr);
}

}  // namespace ip::freq
