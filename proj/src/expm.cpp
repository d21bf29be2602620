#include "fockforge/expm.hpp"

#include <cmath>
#include <stdexcept>

namespace fockforge {

namespace {

using Mat = Eigen::MatrixXcd;

// Pade numerator/denominator for the given coefficient table.
void pade_uv(const Mat& a, const double* c, int m, Mat& u, Mat& v) {
    const Eigen::Index n = a.rows();
    const Mat a2 = a * a;
    Mat even = Mat::Identity(n, n) * c[0];
    Mat odd = Mat::Identity(n, n) * c[1];
    Mat apow = Mat::Identity(n, n);
    for (int k = 2; k <= m; k += 2) {
        apow = apow * a2;
        even += c[k] * apow;
        if (k + 1 <= m) odd += c[k + 1] * apow;
    }
    u = a * odd;
    v = even;
}

Mat pade13(const Mat& a) {
    static const double c[14] = {
        64764752532480000., 32382376266240000., 7771770303897600., 1187353796428800.,
        129060195264000.,   10559470521600.,    670442572800.,     33522128640.,
        1323241920.,        40840800.,          960960.,           16380.,
        182.,               1.};
    const Eigen::Index n = a.rows();
    const Mat a2 = a * a;
    const Mat a4 = a2 * a2;
    const Mat a6 = a4 * a2;
    const Mat id = Mat::Identity(n, n);
    Mat u = a * (a6 * (c[13] * a6 + c[11] * a4 + c[9] * a2) +
                 c[7] * a6 + c[5] * a4 + c[3] * a2 + c[1] * id);
    Mat v = a6 * (c[12] * a6 + c[10] * a4 + c[8] * a2) +
            c[6] * a6 + c[4] * a4 + c[2] * a2 + c[0] * id;
    return (v - u).partialPivLu().solve(v + u);
}

}  // namespace

Eigen::MatrixXcd expm(const Eigen::MatrixXcd& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("expm: matrix must be square");
    if (a.rows() == 0) return a;

    const double norm = a.cwiseAbs().colwise().sum().maxCoeff();  // 1-norm
    if (!std::isfinite(norm)) throw std::invalid_argument("expm: non-finite input");

    static const double theta3 = 1.495585217958292e-2;
    static const double theta5 = 2.539398330063230e-1;
    static const double theta7 = 9.504178996162932e-1;
    static const double theta9 = 2.097847961257068;
    static const double theta13 = 5.371920351148152;

    static const double c3[] = {120., 60., 12., 1.};
    static const double c5[] = {30240., 15120., 3360., 420., 30., 1.};
    static const double c7[] = {17297280., 8648640., 1995840., 277200., 25200., 1512., 56., 1.};
    static const double c9[] = {17643225600., 8821612800., 2075673600., 302702400., 30270240.,
                                2162160.,     110880.,     3960.,       90.,        1.};

    Mat u, v;
    if (norm <= theta9) {
        const double* c = nullptr;
        int m = 0;
        if (norm <= theta3) { c = c3; m = 3; }
        else if (norm <= theta5) { c = c5; m = 5; }
        else if (norm <= theta7) { c = c7; m = 7; }
        else { c = c9; m = 9; }
        pade_uv(a, c, m, u, v);
        return (v - u).partialPivLu().solve(v + u);
    }

    int squarings = 0;
    double scale = norm / theta13;
    if (scale > 1.0) squarings = static_cast<int>(std::ceil(std::log2(scale)));
    Mat scaled = a / std::pow(2.0, squarings);
    Mat result = pade13(scaled);
    for (int i = 0; i < squarings; ++i) result = result * result;
    return result;
}

}  // namespace fockforge
