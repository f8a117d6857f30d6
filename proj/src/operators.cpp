#include "illposed/operators.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ip::ops {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Resolves an out-of-range index per boundary condition. Returns -1 for the
// zero condition (caller reads 0).
Index resolve(Index i, Index n, BoundaryCondition bc) {
    if (i >= 0 && i < n) return i;
    switch (bc) {
        case BoundaryCondition::zero:
            return -1;
        case BoundaryCondition::replicate:
            return std::clamp<Index>(i, 0, n - 1);
        case BoundaryCondition::periodic: {
            Index r = i % n;
            return r < 0 ? r + n : r;
        }
        case BoundaryCondition::reflexive: {
            // Symmetric fold about the edges, repeated until in range.
            Index r = i;
            while (r < 0 || r >= n) {
                if (r < 0) r = -r - 1;
                if (r >= n) r = 2 * n - r - 1;
            }
            return r;
        }
    }
    return -1;
}

void check_kernel(const ImageGrid& K) {
    if (K.height % 2 == 0 || K.width % 2 == 0)
        throw std::invalid_argument("kernel dims must be odd");
}

}  // namespace

Psf psf_build(PsfKind kind, const PsfParams& p) {
    if (p.size < 1 || p.size % 2 == 0)
        throw std::invalid_argument("psf_build: size must be odd and >= 1");
    const Index s = p.size;
    const Index c = s / 2;
    ImageGrid K(s, s, 0.0);

    switch (kind) {
        case PsfKind::gaussian_iso:
        case PsfKind::gaussian_aniso: {
            const double sx = p.sigma_x;
            const double sy = (kind == PsfKind::gaussian_iso) ? p.sigma_x : p.sigma_y;
            if (sx <= 0.0 || sy <= 0.0)
                throw std::invalid_argument("psf_build: sigma must be positive");
            for (Index i = 0; i < s; ++i)
                for (Index j = 0; j < s; ++j) {
                    double di = static_cast<double>(i - c);
                    double dj = static_cast<double>(j - c);
                    K(i, j) = std::exp(-(di * di / (2 * sx * sx) + dj * dj / (2 * sy * sy)));
                }
            break;
        }
        case PsfKind::disk: {
            if (p.radius < 0.0) throw std::invalid_argument("psf_build: radius must be >= 0");
            for (Index i = 0; i < s; ++i)
                for (Index j = 0; j < s; ++j) {
                    double di = static_cast<double>(i - c);
                    double dj = static_cast<double>(j - c);
                    if (std::hypot(di, dj) <= p.radius) K(i, j) = 1.0;
                }
            break;
        }
        case PsfKind::motion: {
            if (p.length < 0.0) throw std::invalid_argument("psf_build: length must be >= 0");
            // Unit-mass segment centered on the kernel, nearest-pixel samples.
            const double ang = p.angle_deg * kPi / 180.0;
            const double dx = std::cos(ang), dy = -std::sin(ang);  // image rows grow down
            const int steps = std::max<int>(1, static_cast<int>(std::ceil(p.length * 4)));
            for (int t = -steps; t <= steps; ++t) {
                double f = 0.5 * p.length * static_cast<double>(t) / steps;
                Index j = c + static_cast<Index>(std::lround(f * dx));
                Index i = c + static_cast<Index>(std::lround(f * dy));
                if (i >= 0 && i < s && j >= 0 && j < s) K(i, j) += 1.0;
            }
            break;
        }
    }

    double sum = 0.0;
    for (double v : K.data) sum += v;
    if (sum <= 0.0) throw std::invalid_argument("psf_build: empty kernel");
    for (double& v : K.data) v /= sum;
    return Psf{std::move(K), kind};
}

ImageGrid conv2d(const ImageGrid& X, const ImageGrid& K, BoundaryCondition bc) {
    check_kernel(K);
    if (K.height > X.height || K.width > X.width)
        throw std::invalid_argument("conv2d: kernel larger than image");
    const Index cr = K.height / 2, cc = K.width / 2;
    ImageGrid Y(X.height, X.width, 0.0);
    for (Index i = 0; i < X.height; ++i)
        for (Index j = 0; j < X.width; ++j) {
            double acc = 0.0;
            for (Index r = 0; r < K.height; ++r) {
                Index xi = resolve(i + r - cr, X.height, bc);
                if (xi < 0) continue;
                for (Index c = 0; c < K.width; ++c) {
                    Index xj = resolve(j + c - cc, X.width, bc);
                    if (xj < 0) continue;
                    acc += K(r, c) * X(xi, xj);
                }
            }
            Y(i, j) = acc;
        }
    return Y;
}

ImageGrid conv2d(const ImageGrid& X, const Psf& H, BoundaryCondition bc) {
    return conv2d(X, H.kernel, bc);
}

Matrix conv_matrix(const ImageGrid& K, Index height, Index width, BoundaryCondition bc) {
    check_kernel(K);
    const Index n = height * width;
    if (n > 16384) throw std::invalid_argument("conv_matrix: height*width exceeds dense guard 16384");
    const Index cr = K.height / 2, cc = K.width / 2;
    Matrix M = Matrix::Zero(n, n);
    // Row of M for output pixel (i,j) accumulates kernel weights at the
    // resolved source pixels; identical index arithmetic to conv2d.
    for (Index i = 0; i < height; ++i)
        for (Index j = 0; j < width; ++j) {
            const Index row = j * height + i;  // column-stacked vectorization
            for (Index r = 0; r < K.height; ++r) {
                Index xi = resolve(i + r - cr, height, bc);
                if (xi < 0) continue;
                for (Index c = 0; c < K.width; ++c) {
                    Index xj = resolve(j + c - cc, width, bc);
                    if (xj < 0) continue;
                    M(row, xj * height + xi) += K(r, c);
                }
            }
        }
    return M;
}

Matrix conv_matrix(const Psf& H, Index height, Index width, BoundaryCondition bc) {
    return conv_matrix(H.kernel, height, width, bc);
}

Matrix downsample_matrix(Index n) {
    if (n <= 0 || n % 2 != 0) throw std::invalid_argument("downsample_matrix: n must be even");
    Matrix M = Matrix::Zero(n / 2, n);
    for (Index k = 0; k < n / 2; ++k) {
        M(k, 2 * k) = 0.5;
        M(k, 2 * k + 1) = 0.5;
    }
    return M;
}

LinearOperator mask_operator(const std::vector<Index>& keep_indices, Index n) {
    auto keep = std::make_shared<std::vector<char>>(static_cast<size_t>(n), 0);
    for (Index k : keep_indices) {
        if (k < 0 || k >= n) throw std::invalid_argument("mask_operator: index out of range");
        (*keep)[static_cast<size_t>(k)] = 1;
    }
    auto act = [keep, n](const Vector& x) {
        Vector y(n);
        for (Index i = 0; i < n; ++i) y[i] = (*keep)[static_cast<size_t>(i)] ? x[i] : 0.0;
        return y;
    };
    return LinearOperator(n, n, act, act);
}

uint64_t counter_value(uint64_t seed, uint64_t k) {
    uint64_t z = seed + (k + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double counter_uniform(uint64_t seed, uint64_t k) {
    return (static_cast<double>(counter_value(seed, k) >> 11) + 0.5) * 0x1.0p-53;
}

double counter_normal(uint64_t seed, uint64_t pair) {
    double u1 = counter_uniform(seed, 2 * pair);
    double u2 = counter_uniform(seed, 2 * pair + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

Vector add_noise(const Vector& y, const GaussianNoise& model, uint64_t seed) {
    if (model.std < 0.0) throw std::invalid_argument("add_noise: negative std");
    Vector out = y;
    if (model.std == 0.0 && model.mean == 0.0) return out;
    for (Index i = 0; i < y.size(); ++i)
        out[i] += model.mean + model.std * counter_normal(seed, static_cast<uint64_t>(i));
    return out;
}

namespace {

// Knuth product method below rate 500, normal approximation above.
double poisson_draw(double rate, uint64_t seed, uint64_t base) {
    if (rate <= 0.0) return 0.0;
    if (rate > 500.0) {
        double v = rate + std::sqrt(rate) * counter_normal(seed, base);
        return std::max(0.0, std::round(v));
    }
    const double L = std::exp(-rate);
    double p = 1.0;
    uint64_t k = 0;
    do {
        ++k;
        p *= counter_uniform(seed, base + k);
    } while (p > L && k < 4000);
    return static_cast<double>(k - 1);
}

}  // namespace

Vector add_noise(const Vector& y, const PoissonNoise& model, uint64_t seed) {
    if (model.scale <= 0.0) throw std::invalid_argument("add_noise: scale must be positive");
    Vector out(y.size());
    for (Index i = 0; i < y.size(); ++i) {
        double rate = model.scale * std::max(y[i], 0.0);
        out[i] = poisson_draw(rate, seed, static_cast<uint64_t>(i) * 4096) / model.scale;
    }
    return out;
}

namespace {

void skip_pgm_junk(std::istream& in) {
    while (true) {
        int ch = in.peek();
        if (ch == '#') {
            std::string line;
            std::getline(in, line);
        } else if (std::isspace(ch)) {
            in.get();
        } else {
            return;
        }
    }
}

}  // namespace

ImageGrid read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_pgm: cannot open " + path);
    std::string magic;
    in >> magic;
    if (magic != "P2" && magic != "P5") throw std::runtime_error("read_pgm: not a P2/P5 file");
    skip_pgm_junk(in);
    long w = 0, h = 0, maxval = 0;
    in >> w;
    skip_pgm_junk(in);
    in >> h;
    skip_pgm_junk(in);
    in >> maxval;
    if (!in || w <= 0 || h <= 0 || maxval <= 0 || maxval > 255)
        throw std::runtime_error("read_pgm: bad header (8-bit only)");
    ImageGrid X(h, w);
    if (magic == "P2") {
        for (Index i = 0; i < h; ++i)
            for (Index j = 0; j < w; ++j) {
                long v;
                in >> v;
                if (!in) throw std::runtime_error("read_pgm: truncated P2 data");
                X(i, j) = static_cast<double>(v) / static_cast<double>(maxval);
            }
    } else {
        in.get();  // single whitespace after maxval
        std::vector<unsigned char> buf(static_cast<size_t>(w * h));
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (in.gcount() != static_cast<std::streamsize>(buf.size()))
            throw std::runtime_error("read_pgm: truncated P5 data");
        for (Index i = 0; i < h; ++i)
            for (Index j = 0; j < w; ++j)
                X(i, j) = static_cast<double>(buf[static_cast<size_t>(i * w + j)]) / static_cast<double>(maxval);
    }
    return X;
}

void write_pgm(const std::string& path, const ImageGrid& X) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_pgm: cannot open " + path);
    out << "P5\n" << X.width << " " << X.height << "\n255\n";
    std::vector<unsigned char> buf(static_cast<size_t>(X.size()));
    for (Index i = 0; i < X.height; ++i)
        for (Index j = 0; j < X.width; ++j) {
            double v = std::clamp(X(i, j), 0.0, 1.0);
            buf[static_cast<size_t>(i * X.width + j)] =
                static_cast<unsigned char>(std::lround(v * 255.0));
        }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw std::runtime_error("write_pgm: write failed");
}

ImageGrid make_phantom(Index height, Index width) {
    ImageGrid X(height, width);
    for (Index i = 0; i < height; ++i)
        for (Index j = 0; j < width; ++j)
            X(i, j) = 0.15 + 0.1 * static_cast<double>(j) / std::max<Index>(1, width - 1);
    // Bright rectangle, upper left quadrant.
    for (Index i = height / 6; i < height / 2; ++i)
        for (Index j = width / 6; j < width / 2; ++j) X(i, j) = 0.85;
    // Disk, lower right.
    const double ci = 0.65 * static_cast<double>(height);
    const double cj = 0.70 * static_cast<double>(width);
    const double rad = 0.16 * static_cast<double>(std::min(height, width));
    for (Index i = 0; i < height; ++i)
        for (Index j = 0; j < width; ++j)
            if (std::hypot(static_cast<double>(i) - ci, static_cast<double>(j) - cj) <= rad)
                X(i, j) = 0.65;
    return X;
}

}  // namespace ip::ops
