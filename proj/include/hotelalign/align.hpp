#pragma once

// Post-hoc alignment of two frozen embedding spaces over their mapped hotels.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hotelalign/data.hpp"
#include "hotelalign/embedding.hpp"

namespace hotelalign {

enum class ProjectionKind { least_squares, orthogonal };

std::string to_string(ProjectionKind k);
ProjectionKind parse_projection_kind(std::string_view s);

struct ProjectionMatrix {
    Matrix W;  // d_source x d_target
    ProjectionKind kind = ProjectionKind::least_squares;
    double fit_residual = 0;  // ||S W - T||_F over the fitted rows
    bool degenerate = false;  // orthogonal fit with repeated or zero singular values
    std::size_t rank = 0;     // numerical rank of S (least squares) or of S^T T (orthogonal)
};

struct CommonRows {
    Matrix source;  // n x d_s
    Matrix target;  // n x d_t
    std::vector<std::pair<std::string, std::string>> ids;
    std::size_t excluded = 0;  // mapped pairs missing from either space
};

// `mapping` runs source id -> target id.
CommonRows common_rows(const EmbeddingSpace& source, const EmbeddingSpace& target, const BrandMapping& mapping);

// argmin_W ||S W - T||_F via complete orthogonal decomposition (column-pivoted
// QR); minimum-norm W when S is rank deficient.
ProjectionMatrix fit_linear_projection(const Matrix& S, const Matrix& T);

// argmin over orthogonal W of ||S W - T||_F: W = U V^T from the SVD of S^T T.
ProjectionMatrix fit_procrustes(const Matrix& S, const Matrix& T);

// Every vector v becomes v W; the brand tag gains a ":projected" suffix.
EmbeddingSpace apply_projection(const EmbeddingSpace& space, const ProjectionMatrix& P);

// "<d_s> <d_t> <kind>" header, then d_s rows of d_t values.
void write_projection(std::ostream& out, const ProjectionMatrix& P);
void write_projection(const std::filesystem::path& path, const ProjectionMatrix& P);
ProjectionMatrix read_projection(std::istream& in);
ProjectionMatrix read_projection(const std::filesystem::path& path);

// max |W^T W - I|
double orthogonality_error(const Matrix& W);

}  // namespace hotelalign
