#include "kahlerlab/polytope.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <set>

#include "kahlerlab/errors.hpp"

namespace klab {

namespace {

using I128 = __int128;

long long gcd_ll(long long a, long long b) {
  a = a < 0 ? -a : a;
  b = b < 0 ? -b : b;
  while (b) {
    long long t = a % b;
    a = b;
    b = t;
  }
  return a;
}

I128 dot(const LatticeVector& a, const LatticeVector& b) {
  I128 s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += static_cast<I128>(a[i]) * b[i];
  return s;
}

LatticeVector sub(const LatticeVector& a, const LatticeVector& b) {
  LatticeVector r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

I128 cross2(const LatticeVector& a, const LatticeVector& b) {
  return static_cast<I128>(a[0]) * b[1] - static_cast<I128>(a[1]) * b[0];
}

LatticeVector cross3(const LatticeVector& a, const LatticeVector& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}

void make_primitive(LatticeVector& v) {
  long long g = 0;
  for (long long c : v) g = gcd_ll(g, c);
  if (g > 1)
    for (long long& c : v) c /= g;
}

Rational rat(I128 v) {
  // I128 -> BigInt through decimal digits (values stay far below 128 bits
  // at desk scale, but keep the conversion total).
  bool neg = v < 0;
  unsigned __int128 m = neg ? -static_cast<unsigned __int128>(v) : v;
  std::string s;
  if (m == 0) s = "0";
  while (m > 0) {
    s += static_cast<char>('0' + static_cast<int>(m % 10));
    m /= 10;
  }
  std::reverse(s.begin(), s.end());
  if (neg) s = "-" + s;
  return Rational(BigInt(s), BigInt(1));
}

// Counterclockwise convex hull of 2-D points (Andrew monotone chain).
std::vector<LatticeVector> hull2d(std::vector<LatticeVector> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<LatticeVector> h;
  auto build = [&](auto begin, auto end) {
    size_t base = h.size();
    for (auto it = begin; it != end; ++it) {
      while (h.size() >= base + 2 &&
             cross2(sub(h.back(), h[h.size() - 2]), sub(*it, h.back())) <= 0)
        h.pop_back();
      h.push_back(*it);
    }
    h.pop_back();
  };
  build(pts.begin(), pts.end());
  build(pts.rbegin(), pts.rend());
  return h;
}

struct FacetKey {
  LatticeVector normal;
  long long offset;
  bool operator<(const FacetKey& o) const {
    if (normal != o.normal) return normal < o.normal;
    return offset < o.offset;
  }
};

// All supporting planes of the 3-D hull, by exhaustive triple scan.
std::vector<LatticePolytope::Facet> facets3d(const std::vector<LatticeVector>& v) {
  std::set<FacetKey> seen;
  std::vector<LatticePolytope::Facet> out;
  const size_t m = v.size();
  for (size_t i = 0; i < m; ++i)
    for (size_t j = i + 1; j < m; ++j)
      for (size_t k = j + 1; k < m; ++k) {
        LatticeVector n = cross3(sub(v[j], v[i]), sub(v[k], v[i]));
        if (n[0] == 0 && n[1] == 0 && n[2] == 0) continue;
        make_primitive(n);
        I128 base = dot(n, v[i]);
        bool above = false, below = false;
        for (const auto& p : v) {
          I128 d = dot(n, p) - base;
          if (d > 0) above = true;
          if (d < 0) below = true;
        }
        if (above && below) continue;
        if (below) {  // flip to inward
          for (auto& c : n) c = -c;
          base = -base;
        }
        FacetKey key{n, static_cast<long long>(-base)};
        if (seen.insert(key).second)
          out.push_back({key.normal, key.offset});
      }
  return out;
}

// Orders a 3-D facet's vertices into a polygon, counterclockwise as seen
// from outside (against the inward normal). Exact integer comparisons.
std::vector<LatticeVector> order_facet(const std::vector<LatticeVector>& pts,
                                       const LatticeVector& inward) {
  // Work in coordinates scaled by the vertex count so the centroid is integral.
  const long long m = static_cast<long long>(pts.size());
  LatticeVector csum(3, 0);
  for (const auto& p : pts)
    for (int i = 0; i < 3; ++i) csum[i] += p[i];
  std::vector<LatticeVector> rel;
  rel.reserve(pts.size());
  for (const auto& p : pts) {
    LatticeVector r(3);
    for (int i = 0; i < 3; ++i) r[i] = m * p[i] - csum[i];
    rel.push_back(r);
  }
  // Angular order around the outward normal: u x w aligned with outward
  // means u precedes w locally; use a fixed half-plane split for totality.
  LatticeVector outward = {-inward[0], -inward[1], -inward[2]};
  const LatticeVector& ref = rel[0];
  auto half = [&](const LatticeVector& u) {
    I128 s = dot(cross3(ref, u), outward);
    if (s != 0) return s > 0 ? 0 : 1;
    return dot(ref, u) > 0 ? 0 : 1;  // same ray as ref first
  };
  std::vector<size_t> idx(pts.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
    int ha = half(rel[a]), hb = half(rel[b]);
    if (ha != hb) return ha < hb;
    return dot(cross3(rel[a], rel[b]), outward) > 0;
  });
  std::vector<LatticeVector> ordered;
  ordered.reserve(pts.size());
  for (size_t i : idx) ordered.push_back(pts[i]);
  return ordered;
}

struct Decomposition {
  // Oriented boundary triangles (outward) for the origin fan.
  std::vector<std::array<LatticeVector, 3>> triangles;
};

Decomposition surface_triangles(const LatticePolytope& p) {
  Decomposition d;
  for (const auto& f : p.facets) {
    std::vector<LatticeVector> on;
    for (const auto& v : p.vertices)
      if (dot(f.normal, v) == -static_cast<I128>(f.offset)) on.push_back(v);
    auto poly = order_facet(on, f.normal);
    for (size_t j = 1; j + 1 < poly.size(); ++j)
      d.triangles.push_back({poly[0], poly[j], poly[j + 1]});
  }
  return d;
}

I128 det3(const LatticeVector& a, const LatticeVector& b, const LatticeVector& c) {
  return static_cast<I128>(a[0]) * (static_cast<I128>(b[1]) * c[2] -
                                    static_cast<I128>(b[2]) * c[1]) -
         static_cast<I128>(a[1]) * (static_cast<I128>(b[0]) * c[2] -
                                    static_cast<I128>(b[2]) * c[0]) +
         static_cast<I128>(a[2]) * (static_cast<I128>(b[0]) * c[1] -
                                    static_cast<I128>(b[1]) * c[0]);
}

}  // namespace

LatticePolytope LatticePolytope::from_vertices(std::vector<LatticeVector> verts) {
  if (verts.empty()) throw ValidationError("polytope: no vertices");
  const int n = static_cast<int>(verts[0].size());
  if (n < 1 || n > 3)
    throw ValidationError("polytope: unsupported dimension " + std::to_string(n));
  for (const auto& v : verts)
    if (static_cast<int>(v.size()) != n)
      throw ValidationError("polytope: inconsistent vertex dimensions");
  std::sort(verts.begin(), verts.end());
  verts.erase(std::unique(verts.begin(), verts.end()), verts.end());

  LatticePolytope p;
  p.dim = n;

  if (n == 1) {
    if (verts.size() != 2)
      throw ValidationError("polytope: a 1-d polytope needs exactly two distinct vertices");
    long long lo = verts[0][0], hi = verts[1][0];
    p.vertices = {{lo}, {hi}};
    p.facets = {{{1}, -lo}, {{-1}, hi}};
    return p;
  }

  if (n == 2) {
    auto h = hull2d(verts);
    if (h.size() < 3)
      throw ValidationError("polytope: not full-dimensional (collinear vertices)");
    if (h.size() != verts.size())
      throw ValidationError("polytope: an input point is not a vertex of the hull");
    p.vertices = h;  // counterclockwise
    for (size_t i = 0; i < h.size(); ++i) {
      const auto& a = h[i];
      const auto& b = h[(i + 1) % h.size()];
      LatticeVector d = sub(b, a);
      LatticeVector normal = {-d[1], d[0]};  // inward for ccw order
      make_primitive(normal);
      p.facets.push_back({normal, static_cast<long long>(-dot(normal, a))});
    }
    return p;
  }

  // n == 3
  p.vertices = verts;
  p.facets = facets3d(verts);
  bool fulldim = false;
  for (size_t i = 1; !fulldim && i < verts.size(); ++i)
    for (size_t j = i + 1; !fulldim && j < verts.size(); ++j)
      for (size_t k = j + 1; !fulldim && k < verts.size(); ++k)
        if (det3(sub(verts[i], verts[0]), sub(verts[j], verts[0]),
                 sub(verts[k], verts[0])) != 0)
          fulldim = true;
  if (!fulldim)
    throw ValidationError("polytope: not full-dimensional (coplanar vertices)");
  for (const auto& v : verts) {
    int saturated = 0;
    for (const auto& f : p.facets) {
      I128 s = dot(f.normal, v) + f.offset;
      if (s < 0) throw ValidationError("polytope: facet/vertex mismatch");
      if (s == 0) ++saturated;
    }
    if (saturated < 3)
      throw ValidationError("polytope: an input point is not a vertex of the hull");
  }
  return p;
}

LatticePolytope LatticePolytope::dilate(long long factor) const {
  if (factor < 1) throw ValidationError("polytope: dilation factor must be >= 1");
  std::vector<LatticeVector> scaled = vertices;
  for (auto& v : scaled)
    for (auto& c : v) c *= factor;
  return from_vertices(std::move(scaled));
}

bool LatticePolytope::contains_lattice_point(const LatticeVector& x, long long k) const {
  for (const auto& f : facets)
    if (dot(f.normal, x) < -static_cast<I128>(k) * f.offset) return false;
  return true;
}

long long lattice_point_count(const LatticePolytope& p, long long k) {
  if (k < 1) throw ValidationError("lattice_point_count: k must be >= 1");
  std::vector<long long> lo(p.dim), hi(p.dim);
  for (int i = 0; i < p.dim; ++i) {
    long long mn = p.vertices[0][i], mx = p.vertices[0][i];
    for (const auto& v : p.vertices) {
      mn = std::min(mn, v[i]);
      mx = std::max(mx, v[i]);
    }
    lo[i] = mn * k;
    hi[i] = mx * k;
  }
  long long count = 0;
  LatticeVector x(p.dim);
  if (p.dim == 1) {
    for (x[0] = lo[0]; x[0] <= hi[0]; ++x[0])
      if (p.contains_lattice_point(x, k)) ++count;
  } else if (p.dim == 2) {
    for (x[0] = lo[0]; x[0] <= hi[0]; ++x[0])
      for (x[1] = lo[1]; x[1] <= hi[1]; ++x[1])
        if (p.contains_lattice_point(x, k)) ++count;
  } else {
    for (x[0] = lo[0]; x[0] <= hi[0]; ++x[0])
      for (x[1] = lo[1]; x[1] <= hi[1]; ++x[1])
        for (x[2] = lo[2]; x[2] <= hi[2]; ++x[2])
          if (p.contains_lattice_point(x, k)) ++count;
  }
  return count;
}

Rational EhrhartPolynomial::eval(long long k) const {
  Rational acc(0);
  Rational kk(1);
  for (const auto& c : coeffs) {
    acc += c * kk;
    kk *= Rational(k);
  }
  return acc;
}

namespace {

// Exact polynomial interpolation: solves the Vandermonde system by Gaussian
// elimination over the rationals.
std::vector<Rational> interpolate(const std::vector<long long>& xs,
                                  const std::vector<Rational>& ys) {
  const size_t m = xs.size();
  std::vector<std::vector<Rational>> a(m, std::vector<Rational>(m + 1));
  for (size_t i = 0; i < m; ++i) {
    Rational pw(1);
    for (size_t j = 0; j < m; ++j) {
      a[i][j] = pw;
      pw *= Rational(xs[i]);
    }
    a[i][m] = ys[i];
  }
  for (size_t col = 0; col < m; ++col) {
    size_t piv = col;
    while (piv < m && a[piv][col].is_zero()) ++piv;
    if (piv == m) throw SolverError("interpolation: singular system");
    std::swap(a[col], a[piv]);
    for (size_t r = 0; r < m; ++r) {
      if (r == col || a[r][col].is_zero()) continue;
      Rational factor = a[r][col] / a[col][col];
      for (size_t c = col; c <= m; ++c) a[r][c] -= factor * a[col][c];
    }
  }
  std::vector<Rational> out(m);
  for (size_t i = 0; i < m; ++i) out[i] = a[i][m] / a[i][i];
  return out;
}

}  // namespace

EhrhartPolynomial ehrhart_fit(const LatticePolytope& p,
                              const std::vector<long long>& k_range) {
  std::vector<long long> ks = k_range;
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  const int n = p.dim;
  if (static_cast<int>(ks.size()) < n + 1)
    throw ValidationError("ehrhart_fit: need at least dim+1 distinct k values");
  for (long long k : ks)
    if (k < 1) throw ValidationError("ehrhart_fit: k values must be >= 1");

  std::vector<long long> base(ks.begin(), ks.begin() + n + 1);
  std::vector<Rational> counts;
  counts.reserve(base.size());
  for (long long k : base) counts.push_back(Rational(lattice_point_count(p, k)));

  EhrhartPolynomial poly;
  poly.coeffs = interpolate(base, counts);

  // Verify on every supplied k plus one held-out dilation.
  std::vector<long long> check(ks.begin() + n + 1, ks.end());
  check.push_back(ks.back() + 1);
  for (long long k : check)
    if (poly.eval(k) != Rational(lattice_point_count(p, k)))
      throw SolverError("ehrhart_fit: counts are not degree-" +
                        std::to_string(n) + " polynomial");
  return poly;
}

Rational polytope_volume(const LatticePolytope& p) {
  if (p.dim == 1) return Rational(p.vertices[1][0] - p.vertices[0][0]);
  if (p.dim == 2) {
    I128 twice = 0;
    const auto& v = p.vertices;  // ccw
    for (size_t i = 0; i < v.size(); ++i) {
      const auto& a = v[i];
      const auto& b = v[(i + 1) % v.size()];
      twice += cross2(a, b);
    }
    return rat(twice) / Rational(2);
  }
  auto d = surface_triangles(p);
  I128 six = 0;
  for (const auto& t : d.triangles) six += det3(t[0], t[1], t[2]);
  if (six < 0) six = -six;
  return rat(six) / Rational(6);
}

std::vector<Rational> barycenter(const LatticePolytope& p) {
  Rational vol = polytope_volume(p);
  if (vol.is_zero()) throw ValidationError("barycenter: degenerate polytope");
  if (p.dim == 1)
    return {Rational(p.vertices[0][0] + p.vertices[1][0]) / Rational(2)};
  if (p.dim == 2) {
    const auto& v = p.vertices;
    Rational cx(0), cy(0);
    for (size_t i = 0; i < v.size(); ++i) {
      const auto& a = v[i];
      const auto& b = v[(i + 1) % v.size()];
      Rational w = rat(cross2(a, b));
      cx += w * Rational(a[0] + b[0]);
      cy += w * Rational(a[1] + b[1]);
    }
    Rational denom = Rational(6) * vol;
    return {cx / denom, cy / denom};
  }
  auto d = surface_triangles(p);
  I128 six = 0;
  std::array<Rational, 3> acc{Rational(0), Rational(0), Rational(0)};
  for (const auto& t : d.triangles) {
    I128 w = det3(t[0], t[1], t[2]);
    six += w;
    for (int i = 0; i < 3; ++i)
      acc[i] += rat(w) * Rational(t[0][i] + t[1][i] + t[2][i]);
  }
  Rational denom = rat(six) * Rational(4);
  return {acc[0] / denom, acc[1] / denom, acc[2] / denom};
}

namespace {

// Lattice-normalized (n-1)-measure and measure-weighted centroid per facet.
struct FacetMeasure {
  Rational measure;
  std::vector<Rational> centroid;
};

std::vector<FacetMeasure> facet_measures(const LatticePolytope& p) {
  std::vector<FacetMeasure> out;
  if (p.dim == 1) {
    for (const auto& v : p.vertices)
      out.push_back({Rational(1), {Rational(v[0])}});
    return out;
  }
  if (p.dim == 2) {
    const auto& v = p.vertices;
    for (size_t i = 0; i < v.size(); ++i) {
      const auto& a = v[i];
      const auto& b = v[(i + 1) % v.size()];
      LatticeVector d = sub(b, a);
      Rational len(gcd_ll(d[0], d[1]));
      out.push_back({len,
                     {Rational(a[0] + b[0]) / Rational(2),
                      Rational(a[1] + b[1]) / Rational(2)}});
    }
    return out;
  }
  for (const auto& f : p.facets) {
    std::vector<LatticeVector> on;
    for (const auto& v : p.vertices)
      if (dot(f.normal, v) == -static_cast<I128>(f.offset)) on.push_back(v);
    auto poly = order_facet(on, f.normal);
    // Project out the coordinate with the largest normal component; the
    // lattice area is the projected shoelace divided by |a_drop|. Fanning
    // from poly[0] keeps every triangle vertex on the facet plane, so the
    // centroid is exact in all three coordinates.
    int drop = 0;
    for (int i = 1; i < 3; ++i)
      if (std::abs(f.normal[i]) > std::abs(f.normal[drop])) drop = i;
    int u = (drop + 1) % 3, w = (drop + 2) % 3;
    I128 twice = 0;
    std::array<I128, 3> cacc{0, 0, 0};
    const auto& p0 = poly[0];
    for (size_t i = 1; i + 1 < poly.size(); ++i) {
      const auto& a = poly[i];
      const auto& b = poly[i + 1];
      I128 c = static_cast<I128>(a[u] - p0[u]) * (b[w] - p0[w]) -
               static_cast<I128>(b[u] - p0[u]) * (a[w] - p0[w]);
      twice += c;
      for (int j = 0; j < 3; ++j) cacc[j] += c * (p0[j] + a[j] + b[j]);
    }
    Rational area2 = rat(twice);
    if (area2.sign() < 0) {
      area2 = -area2;
      for (auto& c : cacc) c = -c;
    }
    Rational measure = area2 / Rational(2 * std::abs(f.normal[drop]));
    std::vector<Rational> centroid(3);
    for (int j = 0; j < 3; ++j)
      centroid[j] = rat(cacc[j]) / (Rational(3) * area2);
    out.push_back({measure, centroid});
  }
  return out;
}

}  // namespace

Rational boundary_measure(const LatticePolytope& p) {
  Rational total(0);
  for (const auto& fm : facet_measures(p)) total += fm.measure;
  return total;
}

std::vector<Rational> boundary_barycenter(const LatticePolytope& p) {
  auto fms = facet_measures(p);
  Rational total(0);
  std::vector<Rational> acc(p.dim, Rational(0));
  for (const auto& fm : fms) {
    total += fm.measure;
    for (int i = 0; i < p.dim; ++i) acc[i] += fm.measure * fm.centroid[i];
  }
  for (int i = 0; i < p.dim; ++i) acc[i] /= total;
  return acc;
}

ToricDegrees toric_degrees(const LatticePolytope& p) {
  Rational fact(1);
  for (int i = 2; i <= p.dim; ++i) fact *= Rational(i);
  Rational factm1(1);
  for (int i = 2; i <= p.dim - 1; ++i) factm1 *= Rational(i);
  ToricDegrees d;
  d.L_degree = fact * polytope_volume(p);
  if (d.L_degree.is_zero())
    throw ValidationError("toric_degrees: polytope is not full-dimensional");
  d.anticanonical_degree = factm1 * boundary_measure(p);
  return d;
}

}  // namespace klab
