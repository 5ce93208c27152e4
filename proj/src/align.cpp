#include "hotelalign/align.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hotelalign {

namespace {

constexpr double kSpectrumTolerance = 1e-10;

double residual(const Matrix& S, const Matrix& W, const Matrix& T)
{
    return (S * W - T).norm();
}

}  // namespace

std::string to_string(ProjectionKind k)
{
    return k == ProjectionKind::least_squares ? "least_squares" : "orthogonal";
}

ProjectionKind parse_projection_kind(std::string_view s)
{
    if (s == "least_squares") return ProjectionKind::least_squares;
    if (s == "orthogonal") return ProjectionKind::orthogonal;
    throw DataError("unknown projection kind '" + std::string(s) + "'");
}

CommonRows common_rows(const EmbeddingSpace& source, const EmbeddingSpace& target, const BrandMapping& mapping)
{
    if (mapping.empty()) throw DataError("common_rows: empty mapping");
    CommonRows out;
    std::vector<std::pair<std::size_t, std::size_t>> rows;
    for (const auto& [s, t] : mapping.pairs()) {
        auto rs = source.find(s);
        auto rt = target.find(t);
        if (!rs || !rt) {
            ++out.excluded;
            continue;
        }
        rows.emplace_back(*rs, *rt);
        out.ids.emplace_back(s, t);
    }
    if (rows.empty()) throw DataError("common_rows: no mapped hotel present in both spaces");
    out.source.resize(Eigen::Index(rows.size()), Eigen::Index(source.dim()));
    out.target.resize(Eigen::Index(rows.size()), Eigen::Index(target.dim()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.source.row(Eigen::Index(i)) = source.row(rows[i].first);
        out.target.row(Eigen::Index(i)) = target.row(rows[i].second);
    }
    return out;
}

ProjectionMatrix fit_linear_projection(const Matrix& S, const Matrix& T)
{
    if (S.rows() == 0) throw std::invalid_argument("fit_linear_projection: no rows");
    if (S.rows() != T.rows()) throw std::invalid_argument("fit_linear_projection: row count mismatch");
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(S);
    ProjectionMatrix P;
    P.kind = ProjectionKind::least_squares;
    P.W = cod.solve(Eigen::MatrixXd(T));
    P.rank = static_cast<std::size_t>(cod.rank());
    P.fit_residual = residual(S, P.W, T);
    return P;
}

ProjectionMatrix fit_procrustes(const Matrix& S, const Matrix& T)
{
    if (S.rows() == 0) throw std::invalid_argument("fit_procrustes: no rows");
    if (S.rows() != T.rows()) throw std::invalid_argument("fit_procrustes: row count mismatch");
    if (S.cols() != T.cols()) throw std::invalid_argument("fit_procrustes: source and target dims differ");

    const Eigen::MatrixXd M = S.transpose() * T;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    ProjectionMatrix P;
    P.kind = ProjectionKind::orthogonal;
    P.W = svd.matrixU() * svd.matrixV().transpose();
    P.fit_residual = residual(S, P.W, T);

    const auto& sv = svd.singularValues();
    const double top = sv.size() > 0 ? sv(0) : 0.0;
    const double tol = kSpectrumTolerance * std::max(top, 1.0);
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > tol) ++P.rank;
        if (sv(i) <= tol || (i > 0 && sv(i - 1) - sv(i) <= tol)) P.degenerate = true;
    }
    return P;
}

EmbeddingSpace apply_projection(const EmbeddingSpace& space, const ProjectionMatrix& P)
{
    if (space.dim() != static_cast<std::size_t>(P.W.rows()))
        throw std::invalid_argument("apply_projection: space dim " + std::to_string(space.dim()) +
                                    " != projection rows " + std::to_string(P.W.rows()));
    Matrix projected = space.vectors() * P.W;
    return EmbeddingSpace(space.brand() + ":projected", space.ids(), std::move(projected));
}

double orthogonality_error(const Matrix& W)
{
    const Eigen::MatrixXd g = W.transpose() * W;
    return (g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

void write_projection(std::ostream& out, const ProjectionMatrix& P)
{
    out << P.W.rows() << ' ' << P.W.cols() << ' ' << to_string(P.kind) << '\n';
    for (Eigen::Index i = 0; i < P.W.rows(); ++i) {
        for (Eigen::Index j = 0; j < P.W.cols(); ++j) {
            if (j) out << ' ';
            out << format_double(P.W(i, j));
        }
        out << '\n';
    }
}

void write_projection(const std::filesystem::path& path, const ProjectionMatrix& P)
{
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    write_projection(out, P);
}

ProjectionMatrix read_projection(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line)) throw DataError("projection file: missing header");
    std::istringstream hs(line);
    long rows = 0, cols = 0;
    std::string kind;
    if (!(hs >> rows >> cols >> kind) || rows <= 0 || cols <= 0)
        throw DataError("projection file: bad header '" + line + "'");
    ProjectionMatrix P;
    P.kind = parse_projection_kind(kind);
    P.W.resize(rows, cols);
    for (long i = 0; i < rows; ++i) {
        if (!std::getline(in, line)) throw DataError("projection file: truncated at row " + std::to_string(i));
        std::istringstream ls(line);
        std::string tok;
        for (long j = 0; j < cols; ++j) {
            if (!(ls >> tok)) throw DataError("projection file: short row " + std::to_string(i));
            P.W(i, j) = parse_double(tok);
        }
        if (ls >> tok) throw DataError("projection file: long row " + std::to_string(i));
    }
    return P;
}

ProjectionMatrix read_projection(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return read_projection(in);
}

}  // namespace hotelalign
