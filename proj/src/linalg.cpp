#include "rdsym/linalg.hpp"

#include <cmath>
#include <map>

namespace rdsym {

int rref(RatMatrix& m)
{
    if (m.empty()) return 0;
    const std::size_t rows = m.size(), cols = m[0].size();
    std::size_t lead = 0;
    int rank = 0;
    for (std::size_t r = 0; r < rows && lead < cols; ++r) {
        std::size_t i = r;
        while (i < rows && m[i][lead] == 0) ++i;
        if (i == rows) {
            ++lead;
            --r;
            continue;
        }
        std::swap(m[i], m[r]);
        Rational pivot = m[r][lead];
        for (auto& x : m[r]) x /= pivot;
        for (std::size_t j = 0; j < rows; ++j) {
            if (j == r || m[j][lead] == 0) continue;
            Rational f = m[j][lead];
            for (std::size_t c = 0; c < cols; ++c) m[j][c] -= f * m[r][c];
        }
        ++rank;
        ++lead;
    }
    return rank;
}

std::optional<RatVector> solve_exact(RatMatrix a, RatVector b)
{
    const std::size_t rows = a.size();
    if (rows == 0) return RatVector{};
    const std::size_t cols = a[0].size();
    for (std::size_t r = 0; r < rows; ++r) a[r].push_back(b[r]);
    rref(a);
    RatVector x(cols, Rational(0));
    for (std::size_t r = 0; r < rows; ++r) {
        std::size_t lead = 0;
        while (lead < cols && a[r][lead] == 0) ++lead;
        if (lead == cols) {
            if (a[r][cols] != 0) return std::nullopt;  // 0 = nonzero
            continue;
        }
        x[lead] = a[r][cols];
    }
    return x;
}

bool in_row_span(const RatMatrix& rows, const RatVector& v)
{
    RatMatrix m = rows;
    int r0 = rref(m);
    m.push_back(v);
    int r1 = rref(m);
    return r1 == r0;
}

bool least_squares(const std::vector<std::vector<double>>& a, const std::vector<double>& b,
                   std::vector<double>& out)
{
    if (a.empty()) return false;
    const std::size_t n = a[0].size();
    std::vector<std::vector<double>> ata(n, std::vector<double>(n + 1, 0.0));
    for (std::size_t r = 0; r < a.size(); ++r) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) ata[i][j] += a[r][i] * a[r][j];
            ata[i][n] += a[r][i] * b[r];
        }
    }
    // Gaussian elimination with partial pivoting
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(ata[r][col]) > std::abs(ata[piv][col])) piv = r;
        if (std::abs(ata[piv][col]) < 1e-12) return false;
        std::swap(ata[piv], ata[col]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            double f = ata[r][col] / ata[col][col];
            for (std::size_t c = col; c <= n; ++c) ata[r][c] -= f * ata[col][c];
        }
    }
    out.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) out[i] = ata[i][n] / ata[i][i];
    return true;
}

TermBasis TermBasis::build(const std::vector<Expr>& exprs)
{
    TermBasis tb;
    std::map<Expr, std::size_t, Expr::Less> index;
    std::vector<std::pair<std::vector<std::pair<std::size_t, Rational>>, int>> rows;
    for (const auto& e : exprs) {
        std::vector<std::pair<std::size_t, Rational>> row;
        for (const auto& t : terms_of(e)) {
            auto [c, m] = coeff_split(t);
            auto it = index.find(m);
            std::size_t idx;
            if (it == index.end()) {
                idx = tb.monomials.size();
                index.emplace(m, idx);
                tb.monomials.push_back(m);
            } else {
                idx = it->second;
            }
            row.emplace_back(idx, c);
        }
        rows.push_back({std::move(row), 0});
    }
    tb.vectors.assign(exprs.size(), RatVector(tb.monomials.size(), Rational(0)));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (const auto& [idx, c] : rows[r].first) tb.vectors[r][idx] += c;
    return tb;
}

}  // namespace rdsym
