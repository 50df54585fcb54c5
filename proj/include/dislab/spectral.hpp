#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace dislab {

using cplx = std::complex<double>;

// Signed wavenumber of FFT index i on a grid of size m (Nyquist maps to -m/2).
inline int wavenumber(int i, int m) { return i < (m + 1) / 2 ? i : i - m; }

// Real-to-complex transform on a row-major d-dimensional periodic grid.
// Owns its buffers and plans; plans are built with FFTW_ESTIMATE so results
// are bitwise reproducible. Not safe to share between threads.
class RealFft {
 public:
  explicit RealFft(std::vector<int> dims);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  RealFft(RealFft&&) noexcept;
  RealFft& operator=(RealFft&&) noexcept;

  const std::vector<int>& dims() const { return dims_; }
  std::size_t real_size() const { return real_size_; }
  // The last dimension is halved: dims[d-1]/2 + 1.
  std::size_t spectral_size() const { return spectral_size_; }
  int half_last() const { return dims_.back() / 2 + 1; }

  // Unnormalized forward transform.
  void forward(const double* in, cplx* out);
  // Inverse transform including the 1/N normalization.
  void inverse(const cplx* in, double* out);

  void forward(const std::vector<double>& in, std::vector<cplx>& out);
  void inverse(const std::vector<cplx>& in, std::vector<double>& out);

 private:
  void release();
  std::vector<int> dims_;
  std::size_t real_size_ = 0;
  std::size_t spectral_size_ = 0;
  double* rbuf_ = nullptr;
  void* cbuf_ = nullptr;
  void* fplan_ = nullptr;
  void* iplan_ = nullptr;
};

// Square 2-d convenience.
inline RealFft make_fft2(int m) { return RealFft({m, m}); }

}  // namespace dislab
