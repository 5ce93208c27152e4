#include "hotelalign/embedding.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "hotelalign/data.hpp"

namespace hotelalign {

EmbeddingSpace::EmbeddingSpace(std::string brand, std::vector<std::string> ids, Matrix vectors)
    : brand_(std::move(brand)), ids_(std::move(ids)), vectors_(std::move(vectors))
{
    if (static_cast<std::size_t>(vectors_.rows()) != ids_.size())
        throw std::invalid_argument("embedding rows do not match id count");
    for (std::size_t i = 0; i < ids_.size(); ++i)
        if (!index_.emplace(ids_[i], i).second)
            throw DataError("duplicate embedding id '" + ids_[i] + "'");
}

std::optional<std::size_t> EmbeddingSpace::find(std::string_view id) const
{
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::string format_double(double value)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text)
{
    double v = 0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw DataError("bad number '" + std::string(text) + "'");
    return v;
}

void write_embeddings(std::ostream& out, const EmbeddingSpace& space)
{
    out << space.size() << ' ' << space.dim() << '\n';
    const auto& m = space.vectors();
    for (std::size_t i = 0; i < space.size(); ++i) {
        out << space.ids()[i];
        for (Eigen::Index j = 0; j < m.cols(); ++j) out << ' ' << format_double(m(Eigen::Index(i), j));
        out << '\n';
    }
}

void write_embeddings(const std::filesystem::path& path, const EmbeddingSpace& space)
{
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    write_embeddings(out, space);
    if (!out) throw DataError("write failed: " + path.string());
}

EmbeddingSpace read_embeddings(std::istream& in, std::string brand)
{
    std::string line;
    if (!std::getline(in, line)) throw DataError("embedding file: missing header");
    std::size_t count = 0, dim = 0;
    {
        std::istringstream hs(line);
        if (!(hs >> count >> dim) || dim == 0) throw DataError("embedding file: bad header '" + line + "'");
    }
    std::vector<std::string> ids;
    ids.reserve(count);
    Matrix m(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < count; ++i) {
        if (!std::getline(in, line))
            throw DataError("embedding file: expected " + std::to_string(count) + " rows, got " +
                            std::to_string(i));
        std::string_view rest(line);
        auto next_token = [&]() -> std::string_view {
            while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
            auto end = rest.find(' ');
            auto tok = rest.substr(0, end);
            rest.remove_prefix(end == std::string_view::npos ? rest.size() : end);
            return tok;
        };
        auto id = next_token();
        if (id.empty()) throw DataError("embedding file: row " + std::to_string(i + 2) + " has no id");
        ids.emplace_back(id);
        for (std::size_t j = 0; j < dim; ++j) {
            auto tok = next_token();
            if (tok.empty())
                throw DataError("embedding file: row " + std::to_string(i + 2) + " has too few values");
            m(Eigen::Index(i), Eigen::Index(j)) = parse_double(tok);
        }
        if (!next_token().empty())
            throw DataError("embedding file: row " + std::to_string(i + 2) + " has too many values");
    }
    return EmbeddingSpace(std::move(brand), std::move(ids), std::move(m));
}

EmbeddingSpace read_embeddings(const std::filesystem::path& path, std::string brand)
{
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return read_embeddings(in, std::move(brand));
}

}  // namespace hotelalign
