#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace kswap::fft {

using Complex = std::complex<double>;

// Unnormalized 2D DFT of a row-major rows x cols grid.
std::vector<Complex> forward(std::span<const Complex> input, std::size_t rows, std::size_t cols);

// Inverse 2D DFT including the 1/(rows*cols) factor.
std::vector<Complex> inverse(std::span<const Complex> input, std::size_t rows, std::size_t cols);

}  // namespace kswap::fft
