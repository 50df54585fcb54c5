#include "dislab/spectral.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace dislab {

namespace {
// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

RealFft::RealFft(std::vector<int> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw std::invalid_argument("RealFft: no dimensions");
  real_size_ = 1;
  for (int d : dims_) {
    if (d < 1) throw std::invalid_argument("RealFft: dimension must be positive");
    real_size_ *= static_cast<std::size_t>(d);
  }
  spectral_size_ = real_size_ / dims_.back() * half_last();
  rbuf_ = fftw_alloc_real(real_size_);
  cbuf_ = fftw_alloc_complex(spectral_size_);
  std::lock_guard<std::mutex> lock(planner_mutex());
  int rank = static_cast<int>(dims_.size());
  fplan_ = fftw_plan_dft_r2c(rank, dims_.data(), rbuf_, static_cast<fftw_complex*>(cbuf_),
                             FFTW_ESTIMATE);
  iplan_ = fftw_plan_dft_c2r(rank, dims_.data(), static_cast<fftw_complex*>(cbuf_), rbuf_,
                             FFTW_ESTIMATE);
  if (!fplan_ || !iplan_) throw std::runtime_error("RealFft: planning failed");
}

RealFft::~RealFft() { release(); }

void RealFft::release() {
  if (fplan_ || iplan_) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (fplan_) fftw_destroy_plan(static_cast<fftw_plan>(fplan_));
    if (iplan_) fftw_destroy_plan(static_cast<fftw_plan>(iplan_));
  }
  if (rbuf_) fftw_free(rbuf_);
  if (cbuf_) fftw_free(cbuf_);
  fplan_ = iplan_ = nullptr;
  rbuf_ = nullptr;
  cbuf_ = nullptr;
}

RealFft::RealFft(RealFft&& o) noexcept { *this = std::move(o); }

RealFft& RealFft::operator=(RealFft&& o) noexcept {
  if (this != &o) {
    release();
    dims_ = std::move(o.dims_);
    real_size_ = o.real_size_;
    spectral_size_ = o.spectral_size_;
    rbuf_ = std::exchange(o.rbuf_, nullptr);
    cbuf_ = std::exchange(o.cbuf_, nullptr);
    fplan_ = std::exchange(o.fplan_, nullptr);
    iplan_ = std::exchange(o.iplan_, nullptr);
  }
  return *this;
}

void RealFft::forward(const double* in, cplx* out) {
  std::memcpy(rbuf_, in, real_size_ * sizeof(double));
  fftw_execute(static_cast<fftw_plan>(fplan_));
  std::memcpy(static_cast<void*>(out), cbuf_, spectral_size_ * sizeof(fftw_complex));
}

void RealFft::inverse(const cplx* in, double* out) {
  // c2r destroys its input, so always go through the owned buffer.
  std::memcpy(cbuf_, static_cast<const void*>(in), spectral_size_ * sizeof(fftw_complex));
  fftw_execute(static_cast<fftw_plan>(iplan_));
  double scale = 1.0 / static_cast<double>(real_size_);
  for (std::size_t i = 0; i < real_size_; ++i) out[i] = rbuf_[i] * scale;
}

void RealFft::forward(const std::vector<double>& in, std::vector<cplx>& out) {
  if (in.size() != real_size_) throw std::invalid_argument("RealFft::forward: size mismatch");
  out.resize(spectral_size_);
  forward(in.data(), out.data());
}

void RealFft::inverse(const std::vector<cplx>& in, std::vector<double>& out) {
  if (in.size() != spectral_size_) throw std::invalid_argument("RealFft::inverse: size mismatch");
  out.resize(real_size_);
  inverse(in.data(), out.data());
}

}  // namespace dislab
