#pragma once

#include "ddps/types.hpp"

// Unitary DFT helpers. Both directions carry 1/sqrt(n).
namespace ddps::fft {

enum class Dir { Forward, Inverse };

void unitary(const cd* in, cd* out, int n, Dir dir);
CVector unitary(const CVector& x, Dir dir);

// Transform every column (length rows()) / every row (length cols()).
CMatrix columns(const CMatrix& x, Dir dir);
CMatrix rows(const CMatrix& x, Dir dir);

} // namespace ddps::fft
