#pragma once

#include "opplab/forms.hpp"

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace opplab {

struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr Real kInf = std::numeric_limits<Real>::infinity();

using Q0Value = FastForm::Value;

// Exact values of Q_0 on lattice vectors, addressed by integer coordinates.
class ExactSource {
public:
    virtual ~ExactSource() = default;
    virtual Q0Value q0(const IVec3& m) const = 0;
    virtual std::shared_ptr<const ExactSource> dual() const = 0;
};

// Delta_Q: Q_0(g m) = Q(m).
std::shared_ptr<const ExactSource> form_source(const QForm& q);
// Exact basis with entries in Q(sqrt d).
std::shared_ptr<const ExactSource> basis_source(const SMat3& b);

class Lattice3 {
public:
    Lattice3() : Lattice3(identity3()) {}
    explicit Lattice3(const Mat3& basis, std::string provenance = "float basis");
    static Lattice3 integer();
    static Lattice3 exact(const SMat3& basis, std::string provenance = "exact basis");

    const Mat3& basis() const { return b_; }
    const Mat3& dual_basis() const { return bd_; }
    const std::shared_ptr<const ExactSource>& source() const { return src_; }
    const std::string& provenance() const { return prov_; }
    const std::optional<SMat3>& exact_basis() const { return exact_; }

    Lattice3 dual() const;
    // h * Delta; the exact Q_0 source survives when h preserves Q_0
    Lattice3 transformed(const Mat3& h, bool preserves_q0) const;
    Lattice3 with_source(std::shared_ptr<const ExactSource> src, std::shared_ptr<const ExactSource> dual_src,
                         std::string provenance) const;

    Vec3 vector(const IVec3& m) const { return b_ * m; }
    Q0Value q0(const IVec3& m) const;

private:
    Mat3 b_, bd_;
    std::shared_ptr<const ExactSource> src_, dsrc_;
    std::optional<SMat3> exact_;
    std::string prov_;
};

Lattice3 lattice_from_form(const QForm& q);
// the congruence g with Q = Q_0^g chosen by lattice_from_form
Mat3 form_congruence(const QForm& q);

struct Reduced {
    Mat3 b;                    // columns: reduced basis
    std::array<IVec3, 3> u;    // u[j] = original coordinates of column j
    std::array<Real, 3> bstar2;
    Real mu[3][3];
    IVec3 original(const IVec3& k) const {
        IVec3 m{};
        for (int i = 0; i < 3; ++i) m[i] = u[0][i] * k[0] + u[1][i] * k[1] + u[2][i] * k[2];
        return m;
    }
};

Reduced lll_reduce(const Mat3& basis);

struct LatticeVector {
    IVec3 m;  // coordinates in the basis handed to the enumerator
    Vec3 v;
    Real norm;
};

// global cap on enumerated points per call (config key enum.max_box)
void set_enumeration_cap(long long cap);
long long enumeration_cap();

// Every nonzero v = B m with |v| <= R, one per sign class. Visitor returns false to stop.
void for_each_vector(const Reduced& r, Real R, bool primitive_only,
                     const std::function<bool(const LatticeVector&)>& visit);
// Layers k = (k1, m2, m3) of the reduced basis meeting B(R), one per sign class; [lo, hi] is the
// integral range of k1 (possibly beyond int64) with |b k| <= R.
void for_each_slice(const Reduced& r, Real R,
                    const std::function<bool(std::int64_t m2, std::int64_t m3, Real lo, Real hi)>& visit);
std::vector<LatticeVector> enumerate_vectors(const Mat3& basis, Real R, bool primitive_only);
std::vector<LatticeVector> enumerate_vectors(const Lattice3& lat, Real R, bool primitive_only);

// Minimize cost over primitive vectors, where cost(w) >= |w| and cost may be +inf.
struct CostResult {
    Real value = kInf;
    LatticeVector arg{};
};
CostResult minimize_primitive(const Reduced& r, const std::function<Real(const LatticeVector&)>& cost);

Real shortest_norm(const Mat3& basis);
Real alpha1(const Mat3& basis);
Real alpha(const Lattice3& lat);

struct RationalSubspace {
    int dim = 1;
    IVec3 vec{1, 0, 0};  // direction (dim 1) or normal (dim 2), primitive integer coordinates
};

// Integral basis of {x in Z^3 : n.x = 0}, Gauss-reduced and sign-canonical.
std::array<IVec3, 2> plane_basis(const IVec3& n);
Real rational_subspace_covolume(const Lattice3& lat, const RationalSubspace& sub);

// log-space test |Q_0(v)| < eta |v|^{-50M}
bool quasi_null_test(const Q0Value& q, Real norm, Real eta, Real M);

enum class SiegelVariant { Full, IsotropicExcluded, QuasiNullExcluded };

struct SiegelOptions {
    SiegelVariant variant = SiegelVariant::Full;
    Real eta = 0.5, M = 2;
    Real plane_search_radius = 20;  // dual-lattice radius searched for exceptional planes
};

struct SupportedFunction {
    std::function<Real(const Vec3&)> f;
    Real inner = 0;  // f vanishes on B(inner)
    Real outer = 0;  // f vanishes outside B(outer)
};

// Integer normals n (dual coordinates) of planes whose dual vector is isotropic / quasi-null.
std::vector<IVec3> exceptional_plane_normals(const Lattice3& lat, const SiegelOptions& opt);
bool excluded_from_Y(const Lattice3& lat, const IVec3& m, const SiegelOptions& opt,
                          const std::vector<IVec3>& normals);
Real siegel_transform(const SupportedFunction& f, const Lattice3& lat, const Mat3& g, const SiegelOptions& opt);

}  // namespace opplab
