#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace hotelalign {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Frozen hotel-id -> vector table. Rows keep insertion order.
class EmbeddingSpace {
public:
    EmbeddingSpace() = default;
    EmbeddingSpace(std::string brand, std::vector<std::string> ids, Matrix vectors);

    std::size_t dim() const { return static_cast<std::size_t>(vectors_.cols()); }
    std::size_t size() const { return ids_.size(); }
    const std::string& brand() const { return brand_; }
    void set_brand(std::string brand) { brand_ = std::move(brand); }

    const std::vector<std::string>& ids() const { return ids_; }
    const Matrix& vectors() const { return vectors_; }
    auto row(std::size_t i) const { return vectors_.row(static_cast<Eigen::Index>(i)); }

    std::optional<std::size_t> find(std::string_view id) const;

    bool operator==(const EmbeddingSpace& other) const
    {
        return brand_ == other.brand_ && ids_ == other.ids_ && vectors_ == other.vectors_;
    }

private:
    std::string brand_;
    std::vector<std::string> ids_;
    Matrix vectors_;
    std::unordered_map<std::string, std::size_t> index_;
};

// Text format: "<count> <dim>" header, then "<id> <v1> ... <vdim>" per line,
// values in shortest round-trip decimal form.
void write_embeddings(std::ostream& out, const EmbeddingSpace& space);
void write_embeddings(const std::filesystem::path& path, const EmbeddingSpace& space);
EmbeddingSpace read_embeddings(std::istream& in, std::string brand = {});
EmbeddingSpace read_embeddings(const std::filesystem::path& path, std::string brand = {});

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);

}  // namespace hotelalign
