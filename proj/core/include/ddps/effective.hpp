#pragma once

#include <iosfwd>
#include <memory>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/SparseCore>

#include "ddps/channel.hpp"
#include "ddps/modem.hpp"

// Matrix form of the modems: x = A_cp O (F_N^H (x) I) Gamma_us S d, and the
// end-to-end delay-Doppler channel H_eff built on top of it.
//
// d is the column-major data vector (M*N). S maps it onto the shaped grid
// (zero insertion for ZG, cyclic extension for CE-before-PS, identity
// otherwise); H_eff acts on the shaped grid, so it is square of side M_d*N.
namespace ddps {

using SpMatrix = Eigen::SparseMatrix<cd>;

struct StructuredMatrices {
    ModemConfig cfg;
    int Md = 0;          // shaped delay rows
    int gamma_tx = 0;    // samples per transmit block
    int gamma_rx = 0;    // samples per receive block
    int origin_tx = 0;   // offset of a block's first sample from n * stride
    int origin_rx = 0;
    int stride = 0;
    std::int64_t xi = 0; // core length

    SpMatrix U;     // M'_d x M_d upsampler
    SpMatrix P;     // pulse matrix of one block (circulant or Toeplitz)
    SpMatrix E;     // ODDM modulation, block diagonal over k; empty otherwise
    SpMatrix W;     // RC window (CE modes); empty otherwise
    SpMatrix R_ce;  // CE after PS: cyclic extension of the shaped block
    SpMatrix S;     // data vector -> shaped grid vector
    SpMatrix Gamma_us;
    SpMatrix Gamma_ds;
    SpMatrix O;     // transmit overlap-add, xi x (gamma_tx N)
    SpMatrix O_rx;  // receive block collection, xi x (gamma_rx N)
    SpMatrix A_cp;
    SpMatrix R_cp;
    CMatrix F_N;    // unitary N-point DFT
};

StructuredMatrices build_structured(const ModemConfig& cfg);

// Literal matrix evaluation including the CP; equals the modem's frame.
SampleStream matrix_modulate(const CVector& d, const StructuredMatrices& mats);

// R_cp H A_cp as a sparse xi x xi matrix.
SpMatrix channel_matrix(const ChannelRealization& ch, const StructuredMatrices& mats);

struct EffectiveChannelMatrix {
    CMatrix H_eff;
    CMatrix noise_cov; // sigma^2 times the unit-noise covariance
    Technique technique = Technique::Cps;
    GuardMode guard = GuardMode::None;
};

// Builds H_eff block by block from the per-Doppler pulse blocks. Channel
// independent parts are computed once per instance.
class EffectiveChannelBuilder {
public:
    explicit EffectiveChannelBuilder(const ModemConfig& cfg);

    const StructuredMatrices& matrices() const { return mats_; }
    CMatrix heff(const ChannelRealization& ch) const;
    // Gamma_ds (F_N (x) I) O_rx^H O_rx (F_N^H (x) I) Gamma_ds^H
    const CMatrix& unit_noise_cov() const;
    // H_eff S as a dense matrix.
    CMatrix detection_matrix(const CMatrix& H_eff) const;

private:
    StructuredMatrices mats_;
    std::vector<CMatrix> tx_; // gamma_tx x Md per Doppler bin (one entry if shared)
    std::vector<CMatrix> rx_;
    mutable std::shared_ptr<const CMatrix> cov_;

    CMatrix pipeline(const std::vector<CMatrix>& tx, int origin_tx,
                     const ChannelRealization* ch) const;
};

EffectiveChannelMatrix build_heff(const ModemConfig& cfg, const ChannelRealization& ch,
                                  double sigma2 = 0.0);

// Straight product of the sparse factors. Meant for small sizes.
CMatrix build_heff_dense(const StructuredMatrices& mats, const ChannelRealization& ch);

// Delay-time equivalent channel: H_eff = (F_N (x) I) H_DT (F_N^H (x) I).
CMatrix delay_time_channel(const StructuredMatrices& mats, const ChannelRealization& ch);

CMatrix noise_covariance(const ModemConfig& cfg, double sigma2);

// d_hat = A^H (A A^H + sigma^2 C)^-1 y. With sigma^2 = 0 this is the
// least-squares (zero-forcing) solution. The factorization is done once and
// reused for every call to equalize().
class MmseEqualizer {
public:
    // An empty C means the identity.
    MmseEqualizer(const CMatrix& A, const CMatrix& C, double sigma2, bool unbiased = false);

    CVector equalize(const CVector& y) const;
    double sigma2() const { return sigma2_; }

private:
    double sigma2_;
    bool unbiased_;
    CMatrix B_; // L^-1 A (MMSE) or A (zero forcing)
    Eigen::LLT<CMatrix> llt_;
    Eigen::VectorXd bias_;
};

CVector mmse_equalize(const CMatrix& H_eff, const CVector& y, double sigma2,
                      const CMatrix& noise_cov_unit = CMatrix());

// Row-major little-endian complex doubles after a 16-byte header:
// 8-byte magic "DDPSHEFF", uint32 rows, uint32 cols.
void export_matrix(std::ostream& os, const CMatrix& m);
CMatrix import_matrix(std::istream& is);

} // namespace ddps
