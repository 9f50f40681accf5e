#include "ddps/fft.hpp"

#include <cmath>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace ddps::fft {

namespace {

Eigen::FFT<double>& engine()
{
    // kissfft plans are cached per size inside the object, so one per thread
    thread_local Eigen::FFT<double> f = [] {
        Eigen::FFT<double> e;
        e.SetFlag(Eigen::FFT<double>::Unscaled);
        return e;
    }();
    return f;
}

} // namespace

void unitary(const cd* in, cd* out, int n, Dir dir)
{
    if (n <= 0)
        return;
    if (n == 1) {
        // kissfft does not handle the trivial length
        out[0] = in[0];
        return;
    }
    auto& f = engine();
    if (dir == Dir::Forward)
        f.fwd(out, in, n);
    else
        f.inv(out, in, n);
    const double s = 1.0 / std::sqrt(static_cast<double>(n));
    for (int i = 0; i < n; ++i)
        out[i] *= s;
}

CVector unitary(const CVector& x, Dir dir)
{
    CVector y(x.size());
    unitary(x.data(), y.data(), static_cast<int>(x.size()), dir);
    return y;
}

CMatrix columns(const CMatrix& x, Dir dir)
{
    CMatrix y(x.rows(), x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c)
        unitary(x.col(c).data(), y.col(c).data(), static_cast<int>(x.rows()), dir);
    return y;
}

CMatrix rows(const CMatrix& x, Dir dir)
{
    const auto n = static_cast<int>(x.cols());
    std::vector<cd> in(n), out(n);
    CMatrix y(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        for (int c = 0; c < n; ++c)
            in[c] = x(r, c);
        unitary(in.data(), out.data(), n, dir);
        for (int c = 0; c < n; ++c)
            y(r, c) = out[c];
    }
    return y;
}

} // namespace ddps::fft
