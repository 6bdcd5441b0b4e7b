#include "isac/otfs.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "isac/fft.hpp"

namespace isac {

DDFrame::DDFrame(Index m, Index n) {
    if (m < 1 || n < 1) throw std::invalid_argument("DDFrame: M and N must be positive");
    symbols_ = CMatrix::Zero(m, n);
}

DDFrame::DDFrame(CMatrix symbols) : symbols_(std::move(symbols)) {
    if (symbols_.rows() < 1 || symbols_.cols() < 1)
        throw std::invalid_argument("DDFrame: M and N must be positive");
}

CVector DDFrame::vec() const { return Eigen::Map<const CVector>(symbols_.data(), symbols_.size()); }

// ---------------------------------------------------------------------------

PskConstellation::PskConstellation(int order) : order_(order) {
    if (order < 2 || !std::has_single_bit(static_cast<unsigned>(order)))
        throw std::invalid_argument("PskConstellation: order must be a power of two >= 2, got " +
                                    std::to_string(order));
    bits_ = std::countr_zero(static_cast<unsigned>(order));
    const double offset = order == 2 ? 0.0 : kPi / order;
    points_.resize(order);
    for (int pos = 0; pos < order; ++pos) {
        const unsigned gray = static_cast<unsigned>(pos) ^ (static_cast<unsigned>(pos) >> 1);
        points_[gray] = std::polar(1.0, 2.0 * kPi * pos / order + offset);
    }
}

cd PskConstellation::map(unsigned bits) const {
    if (bits >= static_cast<unsigned>(order_)) throw std::invalid_argument("PskConstellation: label out of range");
    return points_[bits];
}

unsigned PskConstellation::demap(cd y) const {
    unsigned best = 0;
    double best_d = std::norm(y - points_[0]);
    for (unsigned i = 1; i < points_.size(); ++i) {
        const double d = std::norm(y - points_[i]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

DDFrame random_frame(Index m, Index n, const PskConstellation& psk, std::mt19937_64& rng,
                     std::vector<unsigned>* labels) {
    DDFrame probe(m, n);  // validates dimensions
    std::uniform_int_distribution<unsigned> pick(0, static_cast<unsigned>(psk.order() - 1));
    CMatrix symbols(m, n);
    if (labels) labels->resize(static_cast<std::size_t>(m * n));
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < m; ++i) {
            const unsigned label = pick(rng);
            symbols(i, j) = psk.map(label);
            if (labels) (*labels)[static_cast<std::size_t>(j * m + i)] = label;
        }
    }
    return DDFrame(std::move(symbols));
}

// ---------------------------------------------------------------------------

namespace {

// Applies the unitary N-point DFT (sign -1) or its inverse along the slot
// index of a length M*N vector laid out as [slot][subcarrier].
CVector slot_transform(const CVector& v, Index m, Index n, bool inverse) {
    Fft fft(static_cast<std::size_t>(n));
    std::vector<cd> in(static_cast<std::size_t>(n)), out(static_cast<std::size_t>(n));
    CVector result(v.size());
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < n; ++j) in[static_cast<std::size_t>(j)] = v[j * m + i];
        if (inverse)
            fft.inverse(in, out);
        else
            fft.forward(in, out);
        for (Index j = 0; j < n; ++j) result[j * m + i] = out[static_cast<std::size_t>(j)] * scale;
    }
    return result;
}

}  // namespace

CVector modulate(const DDFrame& frame) { return slot_transform(frame.vec(), frame.m(), frame.n(), true); }

CVector dd_receive(const CVector& r, Index m, Index n) {
    if (m < 1 || n < 1 || r.size() != m * n)
        throw std::invalid_argument("dd_receive: expected a vector of length M*N = " + std::to_string(m * n) +
                                    ", got " + std::to_string(r.size()));
    return slot_transform(r, m, n, false);
}

// ---------------------------------------------------------------------------

CVector add_cp(const CVector& s, CpExtension cp) {
    const Index n_x = s.size();
    if (cp.n_cp < 0 || cp.n_cp > n_x)
        throw std::invalid_argument("add_cp: CP length " + std::to_string(cp.n_cp) + " outside [0, " +
                                    std::to_string(n_x) + "]");
    CVector out(n_x + cp.n_cp);
    out.head(cp.n_cp) = s.tail(cp.n_cp);
    out.tail(n_x) = s;
    return out;
}

CVector remove_cp(const CVector& v, CpExtension cp) {
    if (cp.n_cp < 0 || cp.n_cp > v.size() / 2)
        throw std::invalid_argument("remove_cp: CP length inconsistent with vector length");
    return v.tail(v.size() - cp.n_cp);
}

CVector cp_adjoint(const CVector& v, CpExtension cp) {
    const Index n_x = v.size() - cp.n_cp;
    if (cp.n_cp < 0 || n_x < cp.n_cp) throw std::invalid_argument("cp_adjoint: CP length inconsistent with vector length");
    CVector out = v.tail(n_x);
    out.tail(cp.n_cp) += v.head(cp.n_cp);
    return out;
}

// ---------------------------------------------------------------------------

CVector doppler_phases(int k, Index length, Index n_x) {
    CVector d(length);
    // Reduce n*k modulo n_x in integers before forming the angle.
    const long long kk = ((static_cast<long long>(k) % n_x) + n_x) % n_x;
    for (Index n = 0; n < length; ++n) {
        const long long e = (static_cast<long long>(n) * kk) % n_x;
        d[n] = std::polar(1.0, -2.0 * kPi * static_cast<double>(e) / static_cast<double>(n_x));
    }
    return d;
}

CMatrix channel_matrix(const ChannelSpec& spec, Index n_x) {
    if (n_x < 1) throw std::invalid_argument("channel_matrix: N_x must be positive");
    if (spec.paths.empty()) throw std::invalid_argument("channel_matrix: at least one path is required");
    CMatrix h = CMatrix::Zero(n_x, n_x);
    for (const auto& path : spec.paths) {
        if (path.delay < 0 || path.delay >= n_x)
            throw std::invalid_argument("channel_matrix: delay index " + std::to_string(path.delay) +
                                        " outside [0, " + std::to_string(n_x) + ")");
        const CVector d = doppler_phases(path.doppler, n_x, n_x);
        // (Pi_l D_k v)[n] = d[n - l] v[n - l], indices mod N_x.
        for (Index n = 0; n < n_x; ++n) {
            const Index col = (n - path.delay + n_x) % n_x;
            h(n, col) += path.gain * d[col];
        }
    }
    return h;
}

ChannelSpec random_channel(std::mt19937_64& rng, int paths, int max_delay, int max_doppler) {
    if (paths < 1 || max_delay < 0 || max_doppler < 0)
        throw std::invalid_argument("random_channel: invalid path parameters");
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    std::uniform_int_distribution<int> delay(0, max_delay);
    std::uniform_int_distribution<int> doppler(-max_doppler, max_doppler);
    ChannelSpec spec;
    for (int i = 0; i < paths; ++i) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        const int l = delay(rng);
        const int k = doppler(rng);
        spec.paths.push_back({cd(re, im), l, k});
    }
    return spec;
}

double interference_power(const CMatrix& h, const CVector& x, const CVector& s) {
    if (h.rows() != h.cols() || h.cols() != x.size() || s.size() != x.size())
        throw std::invalid_argument("interference_power: dimension mismatch");
    return (h * x - s).squaredNorm();
}

}  // namespace isac
