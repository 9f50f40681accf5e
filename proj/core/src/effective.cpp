#include "ddps/effective.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>

#include <Eigen/Cholesky>

#include "ddps/fft.hpp"
#include "ddps/pulse.hpp"

namespace ddps {

namespace {

using Triplet = Eigen::Triplet<cd>;
constexpr double two_pi = 2.0 * std::numbers::pi;

int wrap(std::int64_t i, std::int64_t n) { return static_cast<int>(((i % n) + n) % n); }

SpMatrix from_triplets(Eigen::Index rows, Eigen::Index cols, const std::vector<Triplet>& t)
{
    SpMatrix m(rows, cols);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

SpMatrix block_diagonal(const std::vector<SpMatrix>& blocks, int count)
{
    const Eigen::Index r = blocks[0].rows(), c = blocks[0].cols();
    std::vector<Triplet> t;
    for (int k = 0; k < count; ++k) {
        const SpMatrix& b = blocks[static_cast<std::size_t>(k) % blocks.size()];
        for (Eigen::Index j = 0; j < b.outerSize(); ++j)
            for (SpMatrix::InnerIterator it(b, j); it; ++it)
                t.emplace_back(k * r + it.row(), k * c + it.col(), it.value());
    }
    return from_triplets(r * count, c * count, t);
}

// F (x) I_n for a dense N x N matrix F.
SpMatrix kron_identity(const CMatrix& F, int n)
{
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(F.size()) * n);
    for (Eigen::Index a = 0; a < F.rows(); ++a)
        for (Eigen::Index b = 0; b < F.cols(); ++b)
            for (int r = 0; r < n; ++r)
                t.emplace_back(a * n + r, b * n + r, F(a, b));
    return from_triplets(F.rows() * n, F.cols() * n, t);
}

SpMatrix overlap_matrix(std::int64_t xi, int gamma, int N, int stride, int origin)
{
    std::vector<Triplet> t;
    for (int n = 0; n < N; ++n)
        for (int r = 0; r < gamma; ++r)
            t.emplace_back(wrap(static_cast<std::int64_t>(n) * stride + origin + r, xi),
                           n * gamma + r, cd{1.0, 0.0});
    return from_triplets(xi, static_cast<Eigen::Index>(gamma) * N, t);
}

CMatrix dft_matrix(int N)
{
    CMatrix F(N, N);
    const double s = 1.0 / std::sqrt(static_cast<double>(N));
    for (int m = 0; m < N; ++m)
        for (int n = 0; n < N; ++n)
            F(m, n) = std::polar(s, -two_pi * ((static_cast<std::int64_t>(m) * n) % N) / N);
    return F;
}

CMatrix dense_block(const SpMatrix& m, Eigen::Index r0, Eigen::Index c0, Eigen::Index rows,
                    Eigen::Index cols)
{
    return CMatrix(m.block(r0, c0, rows, cols));
}

} // namespace

StructuredMatrices build_structured(const ModemConfig& cfg)
{
    cfg.validate();
    StructuredMatrices s;
    s.cfg = cfg;
    const int L = cfg.L_us;
    const int N = cfg.N;
    const bool ce_after = cfg.guard.active() && cfg.guard.mode == GuardMode::CeAfterPs;
    const bool windowed = cfg.guard.active() && cfg.guard.cyclic_extension();
    s.Md = cfg.shaped_rows();
    s.stride = cfg.block_stride();
    s.xi = cfg.core_len();
    const int Mpd = s.Md * L;

    // U
    {
        std::vector<Triplet> t;
        for (int l = 0; l < s.Md; ++l)
            t.emplace_back(l * L, l, cd{1.0, 0.0});
        s.U = from_triplets(Mpd, s.Md, t);
    }

    // P
    int S = 0;
    int gamma = Mpd;
    if (cfg.technique == Technique::Cps) {
        const PulsePrototype p = make_pulse(cfg.alpha, s.Md, L);
        std::vector<Triplet> t;
        for (int i = 0; i < Mpd; ++i)
            for (int j = 0; j < Mpd; ++j)
                t.emplace_back(i, j, cd{p.periodic[wrap(i - j, Mpd)], 0.0});
        s.P = from_triplets(Mpd, Mpd, t);
    } else {
        const PulsePrototype p = make_pulse(cfg.alpha, s.Md, L, cfg.effective_Q());
        S = p.span;
        gamma = Mpd + 2 * S;
        std::vector<Triplet> t;
        for (int j = 0; j < Mpd; ++j)
            for (int i = j; i <= j + 2 * S; ++i)
                t.emplace_back(i, j, cd{p.at(i - j - S), 0.0});
        s.P = from_triplets(gamma, Mpd, t);
    }

    // E, with the phase referenced to the pulse centre
    std::vector<SpMatrix> shaped;
    if (cfg.technique == Technique::Oddm) {
        std::vector<SpMatrix> Ek;
        for (int k = 0; k < N; ++k) {
            std::vector<Triplet> t;
            const double w = two_pi * k / (static_cast<double>(Mpd) * N);
            for (int j = 0; j < Mpd; ++j)
                for (int i = 0; i < gamma; ++i)
                    t.emplace_back(i, j, std::polar(1.0, w * (i - j - S)));
            Ek.push_back(from_triplets(gamma, Mpd, t));
            shaped.push_back(SpMatrix(s.P.cwiseProduct(Ek.back()) * s.U));
        }
        s.E = block_diagonal(Ek, N);
    } else {
        shaped.push_back(SpMatrix(s.P * s.U));
    }

    // window and cyclic extension
    std::vector<SpMatrix> tx = shaped;
    s.gamma_tx = s.gamma_rx = gamma;
    s.origin_tx = s.origin_rx = -S;
    if (windowed) {
        const WindowProfile w = rc_window(cfg.guard.beta, cfg.M, L);
        std::vector<Triplet> tw;
        for (Eigen::Index i = 0; i < w.taps.size(); ++i)
            tw.emplace_back(i, i, cd{w.taps[i], 0.0});
        s.W = from_triplets(w.taps.size(), w.taps.size(), tw);
        if (ce_after) {
            const int head = cfg.guard.head() * L;
            std::vector<Triplet> tr;
            for (int r = 0; r < s.stride; ++r)
                tr.emplace_back(r, wrap(r - head, Mpd), cd{1.0, 0.0});
            s.R_ce = from_triplets(s.stride, Mpd, tr);
            tx[0] = SpMatrix(s.W * s.R_ce * shaped[0]);
            s.gamma_tx = s.stride;
            s.origin_rx = head;
        } else {
            tx[0] = SpMatrix(s.W * shaped[0]);
        }
    }

    // data placement on the shaped grid
    {
        std::vector<Triplet> t;
        const int head = cfg.guard.head();
        for (int k = 0; k < N; ++k) {
            if (cfg.guard.active() && cfg.guard.mode == GuardMode::ZeroGuard) {
                for (int l = 0; l < cfg.M; ++l)
                    t.emplace_back(k * s.Md + l + head, k * cfg.M + l, cd{1.0, 0.0});
            } else if (cfg.guard.active() && cfg.guard.mode == GuardMode::CeBeforePs) {
                for (int r = 0; r < s.Md; ++r)
                    t.emplace_back(k * s.Md + r, k * cfg.M + wrap(r - head, cfg.M), cd{1.0, 0.0});
            } else {
                for (int l = 0; l < cfg.M; ++l)
                    t.emplace_back(k * s.Md + l, k * cfg.M + l, cd{1.0, 0.0});
            }
        }
        s.S = from_triplets(static_cast<Eigen::Index>(s.Md) * N, static_cast<Eigen::Index>(cfg.M) * N, t);
    }

    s.Gamma_us = block_diagonal(tx, N);
    s.Gamma_ds = SpMatrix(block_diagonal(shaped, N).adjoint());
    s.O = overlap_matrix(s.xi, s.gamma_tx, N, s.stride, s.origin_tx);
    s.O_rx = overlap_matrix(s.xi, s.gamma_rx, N, s.stride, s.origin_rx);

    const int Lcp = cfg.Lcp_us();
    {
        std::vector<Triplet> ta, tr;
        for (int r = 0; r < Lcp; ++r)
            ta.emplace_back(r, s.xi - Lcp + r, cd{1.0, 0.0});
        for (std::int64_t r = 0; r < s.xi; ++r) {
            ta.emplace_back(Lcp + r, r, cd{1.0, 0.0});
            tr.emplace_back(r, Lcp + r, cd{1.0, 0.0});
        }
        s.A_cp = from_triplets(s.xi + Lcp, s.xi, ta);
        s.R_cp = from_triplets(s.xi, s.xi + Lcp, tr);
    }
    s.F_N = dft_matrix(N);
    return s;
}

SampleStream matrix_modulate(const CVector& d, const StructuredMatrices& mats)
{
    if (d.size() != mats.S.cols())
        throw DimensionError("matrix_modulate: data vector has " + std::to_string(d.size()) +
                             " entries, expected " + std::to_string(mats.S.cols()));
    const SpMatrix Fh = kron_identity(mats.F_N.adjoint(), mats.gamma_tx);
    SampleStream out;
    out.samples = mats.A_cp * (mats.O * (Fh * (mats.Gamma_us * (mats.S * d))));
    out.start_index = -mats.cfg.Lcp_us();
    out.rate_factor = mats.cfg.L_us;
    return out;
}

SpMatrix channel_matrix(const ChannelRealization& ch, const StructuredMatrices& mats)
{
    const int Lcp = mats.cfg.Lcp_us();
    const std::int64_t len = mats.xi + Lcp;
    if (ch.frame_len() < len)
        throw DimensionError("channel realization shorter than the frame");
    if (ch.max_delay() > Lcp)
        throw ConfigError("cyclic prefix shorter than the channel delay spread");
    std::vector<Triplet> t;
    for (std::int64_t k = 0; k < len; ++k)
        for (int i : ch.active_taps())
            if (k - i >= 0)
                t.emplace_back(k, k - i, ch.h(k, i));
    const SpMatrix H = from_triplets(len, len, t);
    return SpMatrix(mats.R_cp * H * mats.A_cp);
}

CMatrix build_heff_dense(const StructuredMatrices& mats, const ChannelRealization& ch)
{
    const SpMatrix Fh = kron_identity(mats.F_N.adjoint(), mats.gamma_tx);
    const SpMatrix F = kron_identity(mats.F_N, mats.gamma_rx);
    const SpMatrix H = channel_matrix(ch, mats);
    const SpMatrix right = mats.O * Fh * mats.Gamma_us;
    const SpMatrix left = mats.Gamma_ds * F * SpMatrix(mats.O_rx.adjoint());
    return CMatrix(left * (H * right));
}

CMatrix delay_time_channel(const StructuredMatrices& mats, const ChannelRealization& ch)
{
    const CMatrix& F = mats.F_N;
    const SpMatrix g_us = kron_identity(F.adjoint(), mats.gamma_tx) * mats.Gamma_us *
                          kron_identity(F, mats.Md);
    const SpMatrix g_ds = kron_identity(F.adjoint(), mats.Md) * mats.Gamma_ds *
                          kron_identity(F, mats.gamma_rx);
    const SpMatrix H = channel_matrix(ch, mats);
    return CMatrix(g_ds * SpMatrix(mats.O_rx.adjoint()) * (H * (mats.O * g_us)));
}

EffectiveChannelBuilder::EffectiveChannelBuilder(const ModemConfig& cfg)
    : mats_(build_structured(cfg))
{
    const int N = cfg.N;
    const int blocks = cfg.technique == Technique::Oddm ? N : 1;
    for (int k = 0; k < blocks; ++k) {
        tx_.push_back(dense_block(mats_.Gamma_us, static_cast<Eigen::Index>(k) * mats_.gamma_tx,
                                  static_cast<Eigen::Index>(k) * mats_.Md, mats_.gamma_tx, mats_.Md));
        rx_.push_back(dense_block(mats_.Gamma_ds, static_cast<Eigen::Index>(k) * mats_.Md,
                                  static_cast<Eigen::Index>(k) * mats_.gamma_rx, mats_.Md,
                                  mats_.gamma_rx)
                          .adjoint());
    }
    cov_ = std::make_shared<const CMatrix>(pipeline(rx_, mats_.origin_rx, nullptr));
}

CMatrix EffectiveChannelBuilder::heff(const ChannelRealization& ch) const
{
    if (ch.frame_len() < mats_.xi + mats_.cfg.Lcp_us())
        throw DimensionError("channel realization shorter than the frame");
    if (ch.max_delay() > mats_.cfg.Lcp_us())
        throw ConfigError("cyclic prefix shorter than the channel delay spread");
    return pipeline(tx_, mats_.origin_tx, &ch);
}

const CMatrix& EffectiveChannelBuilder::unit_noise_cov() const { return *cov_; }

CMatrix EffectiveChannelBuilder::detection_matrix(const CMatrix& H_eff) const
{
    return H_eff * mats_.S;
}

// Column block k of H_eff: the frame for every delay bin of Doppler bin k is
// synthesized at once, passed through the channel, and collected by the
// receive blocks of every Doppler bin k'.
CMatrix EffectiveChannelBuilder::pipeline(const std::vector<CMatrix>& tx, int origin_tx,
                                          const ChannelRealization* ch) const
{
    const int N = mats_.cfg.N;
    const int Md = mats_.Md;
    const std::int64_t xi = mats_.xi;
    const int stride = mats_.stride;
    const int Lcp = mats_.cfg.Lcp_us();
    const int grx = mats_.gamma_rx;
    const double s = 1.0 / std::sqrt(static_cast<double>(N));

    CMatrix out(static_cast<Eigen::Index>(Md) * N, static_cast<Eigen::Index>(Md) * N);
    CMatrix X(xi, Md), Z(xi, Md);
    CMatrix G(static_cast<Eigen::Index>(grx) * Md, N);

    for (int k = 0; k < N; ++k) {
        const CMatrix& T = tx[static_cast<std::size_t>(k) % tx.size()];
        X.setZero();
        for (int n = 0; n < N; ++n) {
            const cd ph = std::polar(s, two_pi * ((static_cast<std::int64_t>(k) * n) % N) / N);
            for (Eigen::Index r = 0; r < T.rows(); ++r)
                X.row(wrap(static_cast<std::int64_t>(n) * stride + origin_tx + r, xi)) += ph * T.row(r);
        }

        if (ch) {
            Z.setZero();
            for (int i : ch->active_taps()) {
                for (Eigen::Index c = 0; c < Md; ++c)
                    for (std::int64_t kp = 0; kp < xi; ++kp) {
                        const std::int64_t src = kp >= i ? kp - i : kp - i + xi;
                        Z(kp, c) += ch->h(kp + Lcp, i) * X(src, c);
                    }
            }
        } else {
            Z = X;
        }

        for (int n = 0; n < N; ++n)
            for (Eigen::Index c = 0; c < Md; ++c)
                for (int r = 0; r < grx; ++r)
                    G(c * grx + r, n) =
                        Z(wrap(static_cast<std::int64_t>(n) * stride + mats_.origin_rx + r, xi), c);
        const CMatrix Gf = fft::rows(G, fft::Dir::Forward);

        for (int kp = 0; kp < N; ++kp) {
            const Eigen::Map<const CMatrix> Y(Gf.col(kp).data(), grx, Md);
            const CMatrix& R = rx_[static_cast<std::size_t>(kp) % rx_.size()];
            out.block(static_cast<Eigen::Index>(kp) * Md, static_cast<Eigen::Index>(k) * Md, Md, Md)
                .noalias() = R.adjoint() * Y;
        }
    }
    return out;
}

EffectiveChannelMatrix build_heff(const ModemConfig& cfg, const ChannelRealization& ch, double sigma2)
{
    if (sigma2 < 0.0)
        throw ConfigError("noise variance must be non-negative");
    const EffectiveChannelBuilder b(cfg);
    EffectiveChannelMatrix out;
    out.H_eff = b.heff(ch);
    out.noise_cov = sigma2 * b.unit_noise_cov();
    out.technique = cfg.technique;
    out.guard = cfg.guard.active() ? cfg.guard.mode : GuardMode::None;
    return out;
}

CMatrix noise_covariance(const ModemConfig& cfg, double sigma2)
{
    return sigma2 * EffectiveChannelBuilder(cfg).unit_noise_cov();
}

MmseEqualizer::MmseEqualizer(const CMatrix& A, const CMatrix& C, double sigma2, bool unbiased)
    : sigma2_(sigma2), unbiased_(unbiased)
{
    if (sigma2 < 0.0)
        throw ConfigError("noise variance must be non-negative");
    const Eigen::Index n = A.rows();
    if (C.size() != 0 && (C.rows() != n || C.cols() != n))
        throw DimensionError("noise covariance does not match the channel matrix");

    CMatrix K;
    if (sigma2 > 0.0) {
        K = C.size() ? CMatrix(sigma2 * C) : CMatrix(sigma2 * CMatrix::Identity(n, n));
        K.selfadjointView<Eigen::Lower>().rankUpdate(A);
    } else {
        K = CMatrix::Zero(A.cols(), A.cols());
        K.selfadjointView<Eigen::Lower>().rankUpdate(A.adjoint());
    }
    llt_.compute(K);
    if (llt_.info() != Eigen::Success) {
        const double rc = K.selfadjointView<Eigen::Lower>().ldlt().rcond();
        throw Error("MMSE system is singular to working precision (reciprocal condition " +
                    std::to_string(rc) + ")");
    }
    if (llt_.rcond() < 1e-14)
        throw Error("MMSE system is ill conditioned (reciprocal condition " +
                    std::to_string(llt_.rcond()) + ")");

    if (sigma2 > 0.0) {
        B_ = llt_.matrixL().solve(A);
        bias_ = B_.colwise().squaredNorm().transpose();
    } else {
        B_ = A;
    }
}

CVector MmseEqualizer::equalize(const CVector& y) const
{
    if (y.size() != B_.rows())
        throw DimensionError("observation length does not match the equalizer");
    if (sigma2_ == 0.0)
        return llt_.solve(B_.adjoint() * y);
    CVector d = B_.adjoint() * llt_.matrixL().solve(y);
    if (unbiased_)
        d.array() /= bias_.array().cast<cd>();
    return d;
}

CVector mmse_equalize(const CMatrix& H_eff, const CVector& y, double sigma2,
                      const CMatrix& noise_cov_unit)
{
    return MmseEqualizer(H_eff, noise_cov_unit, sigma2).equalize(y);
}

void export_matrix(std::ostream& os, const CMatrix& m)
{
    const char magic[8] = {'D', 'D', 'P', 'S', 'H', 'E', 'F', 'F'};
    os.write(magic, 8);
    auto put_u32 = [&](std::uint32_t v) {
        unsigned char b[4];
        for (int i = 0; i < 4; ++i)
            b[i] = static_cast<unsigned char>(v >> (8 * i));
        os.write(reinterpret_cast<const char*>(b), 4);
    };
    put_u32(static_cast<std::uint32_t>(m.rows()));
    put_u32(static_cast<std::uint32_t>(m.cols()));
    auto put_f64 = [&](double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        unsigned char b[8];
        for (int i = 0; i < 8; ++i)
            b[i] = static_cast<unsigned char>(bits >> (8 * i));
        os.write(reinterpret_cast<const char*>(b), 8);
    };
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            put_f64(m(r, c).real());
            put_f64(m(r, c).imag());
        }
}

CMatrix import_matrix(std::istream& is)
{
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, "DDPSHEFF", 8) != 0)
        throw Error("not a matrix file");
    auto get_u32 = [&]() {
        unsigned char b[4];
        if (!is.read(reinterpret_cast<char*>(b), 4))
            throw Error("matrix file: truncated header");
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
        return v;
    };
    const std::uint32_t rows = get_u32(), cols = get_u32();
    auto get_f64 = [&]() {
        unsigned char b[8];
        if (!is.read(reinterpret_cast<char*>(b), 8))
            throw Error("matrix file: truncated body");
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i)
            bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    };
    CMatrix m(rows, cols);
    for (std::uint32_t r = 0; r < rows; ++r)
        for (std::uint32_t c = 0; c < cols; ++c) {
            const double re = get_f64();
            m(r, c) = {re, get_f64()};
        }
    return m;
}

} // namespace ddps
