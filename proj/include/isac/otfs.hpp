#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "isac/types.hpp"

namespace isac {

/**
 * Delay-Doppler symbol grid of one OTFS frame.
 *
 * symbols is M x N (M subcarriers, N time slots); vec() stacks columns, so
 * entry (i, j) lands at index j * M + i.
 */
class DDFrame {
public:
    DDFrame(Index m, Index n);
    explicit DDFrame(CMatrix symbols);

    Index m() const { return symbols_.rows(); }
    Index n() const { return symbols_.cols(); }
    Index size() const { return symbols_.size(); }

    const CMatrix& symbols() const { return symbols_; }
    CVector vec() const;

private:
    CMatrix symbols_;
};

/// Unit-modulus PSK alphabet with Gray labelling.
class PskConstellation {
public:
    explicit PskConstellation(int order = 4);

    int order() const { return order_; }
    int bits_per_symbol() const { return bits_; }

    /// Point carrying the Gray-coded label `bits` (0 <= bits < order).
    cd map(unsigned bits) const;
    /// Label of the nearest constellation point.
    unsigned demap(cd y) const;
    const std::vector<cd>& points() const { return points_; }

private:
    int order_;
    int bits_;
    std::vector<cd> points_;  // indexed by label
};

/// Frame filled with uniformly random labels; labels are returned column-major like vec().
DDFrame random_frame(Index m, Index n, const PskConstellation& psk, std::mt19937_64& rng,
                     std::vector<unsigned>* labels = nullptr);

/// s = (F_N^H kron I_M) vec(X) with the unitary N-point DFT.
CVector modulate(const DDFrame& frame);

/// (F_N kron I_M) r; r must have length M*N.
CVector dd_receive(const CVector& r, Index m, Index n);

/// Cyclic prefix of n_cp samples; defines Gamma of size (N_x + n_cp) x N_x.
struct CpExtension {
    Index n_cp = 0;
};

/// Gamma * s: the last n_cp samples of s followed by s.
CVector add_cp(const CVector& s, CpExtension cp);
/// Drops the first n_cp samples of a CP-extended vector.
CVector remove_cp(const CVector& v, CpExtension cp);
/// Gamma^H * v for v of length N_x + n_cp.
CVector cp_adjoint(const CVector& v, CpExtension cp);

struct ChannelPath {
    cd gain;
    int delay = 0;    // in [0, N_x)
    int doppler = 0;  // any integer; on-grid only
};

struct ChannelSpec {
    std::vector<ChannelPath> paths;
};

/// Dense H = sum_i h_i Pi_{l_i} D_{k_i}; Pi_l delays by l samples cyclically.
CMatrix channel_matrix(const ChannelSpec& spec, Index n_x);

/// Diagonal of D_k over `length` samples: exp(-j 2 pi n k / n_x).
CVector doppler_phases(int k, Index length, Index n_x);

/// Paths with CN(0,1) gains, delays uniform in [0, max_delay] and Doppler
/// indices uniform in [-max_doppler, max_doppler].
ChannelSpec random_channel(std::mt19937_64& rng, int paths, int max_delay, int max_doppler);

/// ||H x - s||^2.
double interference_power(const CMatrix& h, const CVector& x, const CVector& s);

}  // namespace isac
