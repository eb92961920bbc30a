// Batch sampler for i.i.d.-lognormal weight models. Built as its own
// translation unit with -ffast-math so gcc vectorizes logf/sinf/expf through
// libmvec; everything else in the library is compiled with strict math.
//
// Weights are indexed by (level, global child index): the gaussian for child
// c at level l comes from Box-Muller pair t = c/2 hashed out of a per-level
// counter stream, so any block of the tree can be generated independently and
// the result is identical for any thread count.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cascade::detail {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// 64-byte-aligned scratch. The math loops below get vectorized with
// alignment peeling, and the scalar peel iterations call scalar libm whose
// results differ from the vector ones in the last ulps; pinning the buffer
// alignment pins the peel split, keeping results independent of heap layout.
template <class T>
struct AlignedArray {
  T* p = nullptr;
  std::size_t n = 0;
  void resize(std::size_t count) {
    if (count <= n) return;
    std::free(p);
    if (posix_memalign(reinterpret_cast<void**>(&p), 64, count * sizeof(T)))
      throw std::bad_alloc();
    n = count;
  }
  ~AlignedArray() { std::free(p); }
  AlignedArray() = default;
  AlignedArray(const AlignedArray&) = delete;
  AlignedArray& operator=(const AlignedArray&) = delete;
  T* data() { return p; }
  T& operator[](std::size_t i) { return p[i]; }
  const T& operator[](std::size_t i) const { return p[i]; }
};

template <class T>
T* assume_aligned64(T* p) {
  return static_cast<T*>(__builtin_assume_aligned(p, 64));
}

inline std::uint64_t mix(std::uint64_t z) {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void pair_hash(std::uint64_t key, std::uint64_t t0, long n,
               std::uint32_t* h1r, std::uint32_t* h2r) {
  std::uint32_t* h1 = assume_aligned64(h1r);
  std::uint32_t* h2 = assume_aligned64(h2r);
  for (long t = 0; t < n; ++t) {
    std::uint64_t z = key + (std::uint64_t)(t0 + t) * kGolden + kGolden;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    h1[t] = (std::uint32_t)(z >> 32);
    h2[t] = (std::uint32_t)z;
  }
}

// One Box-Muller pair per hash: gA[t] and gB[t] are the two lognormal weights
// of children 2t and 2t+1. sinf twice (phase-shifted) instead of sincos so the
// vectorizer is not blocked by cexpi.
void pair_math(const std::uint32_t* h1r, const std::uint32_t* h2r, float* gAr,
               float* gBr, long n, float beta, float shift) {
  const std::uint32_t* h1 = assume_aligned64(h1r);
  const std::uint32_t* h2 = assume_aligned64(h2r);
  float* gA = assume_aligned64(gAr);
  float* gB = assume_aligned64(gBr);
  for (long t = 0; t < n; ++t) {
    float u1 = (float)(h1[t] | 1u) * 0x1.0p-32f;
    float ang = 6.2831853f * ((float)h2[t] * 0x1.0p-32f);
    float rad = beta * std::sqrt(-2.0f * std::log(u1));
    gA[t] = std::exp(rad * std::sin(ang) + shift);
    gB[t] = std::exp(rad * std::sin(ang + 1.5707964f) + shift);
  }
}

struct Scratch {
  AlignedArray<std::uint32_t> h1, h2;
  AlignedArray<float> gA, gB;
  AlignedArray<float> mass[2];
  AlignedArray<std::uint32_t> ul[2];
  void reserve(long cells) {
    long pairs = cells / 2 + 2;
    h1.resize(pairs); h2.resize(pairs);
    gA.resize(pairs); gB.resize(pairs);
    mass[0].resize(cells); mass[1].resize(cells);
    ul[0].resize(cells); ul[1].resize(cells);
  }
};

struct LevelKeys {
  std::vector<std::uint64_t> key;  // per level, 1-based
};

// Expands one level: parents (mass, ulocal) -> children, consuming weights for
// global child indices [gbase, gbase + P*mm).
void expand(const LevelKeys& keys, int level, int m, float beta, float shift,
            std::uint64_t gbase, const float* pmass, const std::uint32_t* pul,
            long parents, float* cmass, std::uint32_t* cul, Scratch& sc) {
  const int mm = m * m;
  const long cells = parents * mm;
  const std::uint64_t t0 = gbase >> 1;
  const long base_par = (long)(gbase & 1);
  const long pairs = (base_par + cells + 1) / 2;
  pair_hash(keys.key[level], t0, pairs, sc.h1.data(), sc.h2.data());
  pair_math(sc.h1.data(), sc.h2.data(), sc.gA.data(), sc.gB.data(), pairs, beta, shift);
  if (m == 2) {
    // four children per parent, pair-aligned (gbase is a multiple of 4)
    const float* gA = assume_aligned64(sc.gA.data());
    const float* gB = assume_aligned64(sc.gB.data());
    for (long p = 0; p < parents; ++p) {
      float mp = pmass[p];
      std::uint32_t up = pul[p] * 2u;
      long t = 2 * p;
      cmass[4 * p + 0] = mp * gA[t];
      cmass[4 * p + 1] = mp * gB[t];
      cmass[4 * p + 2] = mp * gA[t + 1];
      cmass[4 * p + 3] = mp * gB[t + 1];
      cul[4 * p + 0] = up;
      cul[4 * p + 1] = up;
      cul[4 * p + 2] = up + 1;
      cul[4 * p + 3] = up + 1;
    }
    return;
  }
  long c = 0;
  for (long p = 0; p < parents; ++p) {
    float mp = pmass[p];
    std::uint32_t up = pul[p] * (std::uint32_t)m;
    for (int d = 0; d < mm; ++d, ++c) {
      long par = (base_par + c) & 1;
      long t = (base_par + c) >> 1;
      float w = par ? sc.gB[t] : sc.gA[t];
      cmass[c] = mp * w;
      cul[c] = up + (std::uint32_t)(d / m);
    }
  }
}

}  // namespace

void lognormal_projected(int m, double beta, const std::vector<int>& depths,
                         std::uint64_t seed, int jobs,
                         std::vector<std::vector<double>>& pi_out) {
  if (beta > 4.0)
    throw std::runtime_error("lognormal batch kernel supports beta <= 4");
  const int nmax = depths.back();
  const int mm = m * m;
  const float shift = (float)(-0.5 * beta * beta - 2.0 * std::log((double)m));
  const float betaf = (float)beta;

  // split level: largest L with (m^2)^L <= 16384
  int L0 = 0;
  for (long cells = 1; L0 < nmax && cells * mm <= 16384; ++L0) cells *= mm;
  const int J = nmax - L0;

  LevelKeys keys;
  keys.key.resize(nmax + 1);
  std::uint64_t root = mix(seed ^ 0x8f1bbcdcbfa53e0bULL);
  for (int l = 1; l <= nmax; ++l) keys.key[l] = mix(root + (std::uint64_t)l * kGolden);

  pi_out.assign(depths.size(), {});
  std::vector<double*> pi_ptr(nmax + 1, nullptr);
  for (size_t k = 0; k < depths.size(); ++k) {
    size_t n = 1;
    for (int t = 0; t < depths[k]; ++t) n *= m;
    pi_out[k].assign(n, 0.0);
    pi_ptr[depths[k]] = pi_out[k].data();
  }

  // top pass: levels 1..L0, full arrays
  Scratch top;
  long top_cells = 1;
  for (int l = 0; l < L0; ++l) top_cells *= mm;
  top.reserve(top_cells);
  long P = 1;
  top.mass[0][0] = 1.0f;
  top.ul[0][0] = 0;
  int cur = 0;
  for (int l = 1; l <= L0; ++l) {
    expand(keys, l, m, betaf, shift, 0, top.mass[cur].data(), top.ul[cur].data(), P,
           top.mass[1 - cur].data(), top.ul[1 - cur].data(), top);
    cur = 1 - cur;
    P *= mm;
    if (pi_ptr[l]) {
      double* pi = pi_ptr[l];
      if (m == 2)  // children come in equal-projection pairs
        for (long c = 0; c < P; c += 2)
          pi[top.ul[cur][c]] += (double)top.mass[cur][c] + (double)top.mass[cur][c + 1];
      else
        for (long c = 0; c < P; ++c) pi[top.ul[cur][c]] += (double)top.mass[cur][c];
    }
  }

  if (J == 0) return;

  const long n_u = [&] { long r = 1; for (int t = 0; t < L0; ++t) r *= m; return r; }();
  const float* topmass = top.mass[cur].data();
  const std::uint32_t* topul = top.ul[cur].data();

  // group the L0-level cells by their projection index
  std::vector<std::vector<long>> cells_of_u(n_u);
  for (long c = 0; c < P; ++c) cells_of_u[topul[c]].push_back(c);

  std::vector<long> mpow(J + 1, 1), mmpow(J + 1, 1);
  for (int j = 1; j <= J; ++j) {
    mpow[j] = mpow[j - 1] * m;
    mmpow[j] = mmpow[j - 1] * mm;
  }

#ifdef _OPENMP
  int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel num_threads(threads)
#endif
  {
    Scratch sc;
    sc.reserve(mmpow[J]);
#ifdef _OPENMP
#pragma omp for schedule(dynamic)
#endif
    for (long u7 = 0; u7 < n_u; ++u7) {
      // each u7 owns disjoint slices pi_l[u7*m^(l-L0) ...] for all l > L0
      for (long cglob : cells_of_u[u7]) {
        double q7 = (double)topmass[cglob];
        if (q7 <= 0) continue;
        long par = 1;
        int sc_cur = 0;
        sc.mass[0][0] = 1.0f;
        sc.ul[0][0] = 0;
        for (int j = 1; j <= J; ++j) {
          std::uint64_t gbase = (std::uint64_t)cglob * (std::uint64_t)mmpow[j];
          expand(keys, L0 + j, m, betaf, shift, gbase, sc.mass[sc_cur].data(),
                 sc.ul[sc_cur].data(), par, sc.mass[1 - sc_cur].data(),
                 sc.ul[1 - sc_cur].data(), sc);
          sc_cur = 1 - sc_cur;
          par *= mm;
          if (pi_ptr[L0 + j]) {
            double* pi = pi_ptr[L0 + j] + u7 * mpow[j];
            const float* cm = sc.mass[sc_cur].data();
            const std::uint32_t* cu = sc.ul[sc_cur].data();
            if (m == 2)
              for (long c = 0; c < par; c += 2)
                pi[cu[c]] += q7 * ((double)cm[c] + (double)cm[c + 1]);
            else
              for (long c = 0; c < par; ++c) pi[cu[c]] += q7 * (double)cm[c];
          }
        }
      }
    }
  }
}

} // namespace cascade::detail
