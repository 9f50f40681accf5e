#include "ddps/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ddps/fft.hpp"

namespace ddps {

namespace {

int axis_bits(int order)
{
    const int b = bits_per_symbol(order);
    return b / 2;
}

double qam_scale(int order) { return std::sqrt(2.0 * (order - 1) / 3.0); }

} // namespace

int bits_per_symbol(int order)
{
    switch (order) {
    case 4: return 2;
    case 16: return 4;
    case 64: return 6;
    default: throw ConfigError("unsupported QAM order " + std::to_string(order));
    }
}

CVector qam_map(const std::vector<std::uint8_t>& bits, int order)
{
    const int b = bits_per_symbol(order);
    const int m = axis_bits(order);
    const int levels = 1 << m;
    if (bits.size() % b != 0)
        throw DimensionError("bit count is not a multiple of the bits per symbol");
    const double scale = qam_scale(order);
    auto level = [&](const std::uint8_t* p) {
        int g = 0;
        for (int i = 0; i < m; ++i)
            g = (g << 1) | (p[i] & 1);
        int v = g; // gray -> binary
        for (int s = g >> 1; s; s >>= 1)
            v ^= s;
        return (levels - 1) - 2 * v;
    };
    CVector out(static_cast<Eigen::Index>(bits.size() / b));
    for (Eigen::Index s = 0; s < out.size(); ++s) {
        const std::uint8_t* p = bits.data() + s * b;
        out[s] = cd{static_cast<double>(level(p)), static_cast<double>(level(p + m))} / scale;
    }
    return out;
}

DelayDopplerGrid qam_map(const std::vector<std::uint8_t>& bits, int order, int M, int N)
{
    if (bits.size() != static_cast<std::size_t>(M) * N * bits_per_symbol(order))
        throw DimensionError("bit count does not fill the M x N grid");
    const CVector s = qam_map(bits, order);
    return {Eigen::Map<const CMatrix>(s.data(), M, N)};
}

std::vector<std::uint8_t> qam_demap(const CVector& symbols, int order)
{
    const int b = bits_per_symbol(order);
    const int m = axis_bits(order);
    const int levels = 1 << m;
    const double scale = qam_scale(order);
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(symbols.size()) * b);
    auto put = [&](double a, std::uint8_t* p) {
        int v = static_cast<int>(std::lround(((levels - 1) - a * scale) / 2.0));
        v = std::clamp(v, 0, levels - 1);
        const int g = v ^ (v >> 1);
        for (int i = 0; i < m; ++i)
            p[i] = static_cast<std::uint8_t>((g >> (m - 1 - i)) & 1);
    };
    for (Eigen::Index s = 0; s < symbols.size(); ++s) {
        std::uint8_t* p = bits.data() + s * b;
        put(symbols[s].real(), p);
        put(symbols[s].imag(), p + m);
    }
    return bits;
}

std::vector<std::uint8_t> qam_demap(const DelayDopplerGrid& grid, int order)
{
    const CVector v = Eigen::Map<const CVector>(grid.symbols.data(), grid.symbols.size());
    return qam_demap(v, order);
}

double qam_ber_awgn(int order, double ebn0_db)
{
    const int k = bits_per_symbol(order);
    const int root = 1 << (k / 2);
    const double gb = std::pow(10.0, ebn0_db / 10.0);
    const double arg = std::sqrt(3.0 * k * gb / (2.0 * (order - 1)));
    // per-bit-position error probabilities of Gray-coded PAM on each axis
    double total = 0.0;
    for (int bit = 1; bit <= k / 2; ++bit) {
        double pb = 0.0;
        const int w = 1 << (bit - 1);
        const int imax = static_cast<int>((1.0 - 1.0 / (1 << bit)) * root) - 1;
        for (int i = 0; i <= imax; ++i) {
            const double q = std::floor(static_cast<double>(i) * w / root);
            const double sign = (static_cast<long>(q) % 2 == 0) ? 1.0 : -1.0;
            const double weight = w - std::floor(static_cast<double>(i) * w / root + 0.5);
            pb += sign * weight * std::erfc((2 * i + 1) * arg);
        }
        total += pb / root;
    }
    return total / (k / 2);
}

WelchPsd::WelchPsd(int seg_len, int overlap) : seg_len_(seg_len), overlap_(overlap)
{
    if (seg_len < 2 || overlap < 0 || overlap >= seg_len)
        throw ConfigError("Welch: need seg_len >= 2 and 0 <= overlap < seg_len");
    taper_.resize(seg_len);
    for (int i = 0; i < seg_len; ++i)
        taper_[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / seg_len);
    acc_ = RVector::Zero(seg_len);
}

void WelchPsd::add(const CVector& x)
{
    if (x.size() < seg_len_)
        throw DimensionError("Welch: stream shorter than one segment");
    const Eigen::Index hop = seg_len_ - overlap_;
    CVector seg(seg_len_);
    for (Eigen::Index start = 0; start + seg_len_ <= x.size(); start += hop) {
        seg = x.segment(start, seg_len_).cwiseProduct(taper_.cast<cd>());
        acc_ += fft::unitary(seg, fft::Dir::Forward).cwiseAbs2();
        ++count_;
    }
}

PsdEstimate WelchPsd::finish(double inband_edge) const
{
    if (count_ == 0)
        throw Error("Welch: no segments accumulated");
    PsdEstimate out;
    out.seg_len = seg_len_;
    out.overlap = overlap_;
    out.averages = count_;
    out.inband_edge = inband_edge;
    out.freqs.resize(seg_len_);
    RVector p(seg_len_);
    const int half = seg_len_ / 2;
    for (int i = 0; i < seg_len_; ++i) {
        const int bin = (i + seg_len_ - half) % seg_len_; // fftshift
        out.freqs[i] = static_cast<double>(i - half) / seg_len_;
        p[i] = acc_[bin] / static_cast<double>(count_);
    }
    double ref = 0.0;
    int n = 0;
    for (int i = 0; i < seg_len_; ++i)
        if (std::abs(out.freqs[i]) < inband_edge) {
            ref += p[i];
            ++n;
        }
    if (n == 0 || ref <= 0.0)
        throw Error("Welch: empty or silent in-band region");
    ref /= n;
    out.power_db.resize(seg_len_);
    for (int i = 0; i < seg_len_; ++i)
        out.power_db[i] = std::max(10.0 * std::log10(std::max(p[i] / ref, 1e-300)), -200.0);
    return out;
}

PsdEstimate estimate_psd(const CVector& x, int seg_len, int overlap, double inband_edge)
{
    WelchPsd w(seg_len, overlap);
    w.add(x);
    return w.finish(inband_edge);
}

double oob_power(const PsdEstimate& psd, double band_edge, double offset)
{
    double in = 0.0, out = 0.0;
    int nin = 0, nout = 0;
    for (Eigen::Index i = 0; i < psd.freqs.size(); ++i) {
        const double f = std::abs(psd.freqs[i]);
        const double p = std::pow(10.0, psd.power_db[i] / 10.0);
        if (f < band_edge) {
            in += p;
            ++nin;
        } else if (f >= band_edge + offset) {
            out += p;
            ++nout;
        }
    }
    if (nin == 0 || nout == 0)
        throw ConfigError("oob_power: band edge and offset leave an empty region");
    if (out <= 0.0)
        return -200.0;
    return std::max(10.0 * std::log10((out / nout) / (in / nin)), -200.0);
}

int psd_shift(const PsdEstimate& a, const PsdEstimate& b)
{
    if (a.power_db.size() != b.power_db.size())
        throw DimensionError("psd_shift: spectra of different length");
    const Eigen::Index n = a.power_db.size();
    CVector x = (a.power_db.array() - a.power_db.mean()).cast<cd>();
    CVector y = (b.power_db.array() - b.power_db.mean()).cast<cd>();
    const CVector X = fft::unitary(x, fft::Dir::Forward);
    const CVector Y = fft::unitary(y, fft::Dir::Forward);
    const CVector r = fft::unitary(CVector(X.conjugate().cwiseProduct(Y)), fft::Dir::Inverse);
    Eigen::Index best = 0;
    r.real().maxCoeff(&best);
    return static_cast<int>(best > n / 2 ? best - n : best);
}

double papr_db(const CVector& x)
{
    if (x.size() == 0)
        throw DimensionError("papr of an empty stream");
    const double mean = x.squaredNorm() / static_cast<double>(x.size());
    if (mean == 0.0)
        throw Error("papr of an all-zero stream");
    return 10.0 * std::log10(x.cwiseAbs2().maxCoeff() / mean);
}

PaprCcdf papr_ccdf(const std::vector<double>& values, const RVector& thresholds_db)
{
    PaprCcdf out;
    out.thresholds_db = thresholds_db;
    out.ccdf = RVector::Zero(thresholds_db.size());
    out.frames = static_cast<std::int64_t>(values.size());
    if (values.empty())
        return out;
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    for (Eigen::Index t = 0; t < thresholds_db.size(); ++t) {
        const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), thresholds_db[t]);
        out.ccdf[t] = static_cast<double>(above) / static_cast<double>(sorted.size());
    }
    return out;
}

PaprCcdf papr_ccdf(const std::vector<CVector>& frames, const RVector& thresholds_db)
{
    if (frames.size() < 100)
        throw ConfigError("papr_ccdf needs at least 100 frames");
    std::vector<double> v;
    v.reserve(frames.size());
    for (const CVector& f : frames)
        v.push_back(papr_db(f));
    return papr_ccdf(v, thresholds_db);
}

std::pair<double, double> wilson_interval(std::int64_t k, std::int64_t n, double z)
{
    if (n <= 0)
        return {0.0, 1.0};
    const double p = static_cast<double>(k) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double centre = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b)
{
    if (a.empty() || b.empty())
        throw ConfigError("KS test needs two non-empty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v)
            ++i;
        while (j < b.size() && b[j] <= v)
            ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    const double ne = na * nb / (na + nb);
    const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
    if (lambda < 1e-3)
        return {d, 1.0};
    // Kolmogorov distribution tail
    double p = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
        p += term;
        if (std::abs(term) < 1e-12)
            break;
    }
    return {d, std::clamp(p, 0.0, 1.0)};
}

} // namespace ddps
