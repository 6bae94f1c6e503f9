#include "apgkit/io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <bit>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

namespace apgkit::io {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 40> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

std::string FileHeader::line() const {
    return "# " + tool + " " + version + " config=" + config_hash + " seed=" + std::to_string(seed);
}

namespace {

double parse_number(const std::string& cell, const fs::path& path, std::size_t line) {
    std::string s = cell;
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    std::size_t start = 0;
    while (start < s.size() && std::isspace(static_cast<unsigned char>(s[start]))) ++start;
    s = s.substr(start);
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size())
        throw IoError(path.string() + ":" + std::to_string(line) + ": not a number: '" + cell + "'");
    return v;
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) throw IoError("cannot open " + path.string());
    return in;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, mode);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

void put_u32(std::ostream& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

namespace {

std::string cell(double v) { return std::isnan(v) ? std::string() : format_double(v); }

std::string cell(Flag f) {
    switch (f) {
        case Flag::Holds: return "1";
        case Flag::Violated: return "0";
        case Flag::NotChecked: break;
    }
    return "";
}

}  // namespace

void write_trace_csv(const fs::path& path, const SolverTrace<double>& trace, const FileHeader* header) {
    auto out = open_out(path);
    if (header) out << header->line() << '\n';
    out << "iter,F,gap,xi,dist_S,gradmap,bound_rate,bound_xi,bound_ball\n";
    for (const auto& r : trace.records) {
        out << r.k << ',' << cell(r.F) << ',' << cell(r.gap) << ',' << cell(r.xi) << ',' << cell(r.dist_S) << ','
            << cell(r.gradmap) << ',' << cell(r.bound_rate) << ',' << cell(r.bound_xi) << ',' << cell(r.bound_ball)
            << '\n';
    }
}

Matrix read_csv(const fs::path& path) {
    auto in = open_in(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(parse_number(cell, path, lineno));
        if (!rows.empty() && row.size() != rows.front().size())
            throw IoError(path.string() + ":" + std::to_string(lineno) + ": ragged row");
        rows.push_back(std::move(row));
    }
    const Index r = static_cast<Index>(rows.size());
    const Index c = rows.empty() ? 0 : static_cast<Index>(rows.front().size());
    Matrix M(r, c);
    for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < c; ++j) M(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return M;
}

void write_csv(const fs::path& path, const Matrix& M, const FileHeader* header) {
    auto out = open_out(path);
    if (header) out << header->line() << '\n';
    for (Index i = 0; i < M.rows(); ++i) {
        for (Index j = 0; j < M.cols(); ++j) {
            if (j) out << ',';
            out << format_double(M(i, j));
        }
        out << '\n';
    }
}

Matrix read_binary(const fs::path& path) {
    auto in = open_in(path, std::ios::binary);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < 8) throw IoError(path.string() + ": truncated header");
    const std::uint32_t r = get_u32(bytes.data());
    const std::uint32_t c = get_u32(bytes.data() + 4);
    const std::size_t n = static_cast<std::size_t>(r) * c;
    if (bytes.size() != 8 + 8 * n)
        throw IoError(path.string() + ": expected " + std::to_string(8 + 8 * n) + " bytes, got " +
                      std::to_string(bytes.size()));
    Matrix M(r, c);
    const unsigned char* p = bytes.data() + 8;
    for (std::uint32_t i = 0; i < r; ++i) {
        for (std::uint32_t j = 0; j < c; ++j, p += 8) {
            std::uint64_t bits = 0;
            for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(p[b]) << (8 * b);
            M(i, j) = std::bit_cast<double>(bits);
        }
    }
    return M;
}

void write_binary(const fs::path& path, const Matrix& M) {
    auto out = open_out(path, std::ios::binary);
    put_u32(out, static_cast<std::uint32_t>(M.rows()));
    put_u32(out, static_cast<std::uint32_t>(M.cols()));
    for (Index i = 0; i < M.rows(); ++i) {
        for (Index j = 0; j < M.cols(); ++j) {
            const auto bits = std::bit_cast<std::uint64_t>(M(i, j));
            for (int b = 0; b < 8; ++b) out.put(static_cast<char>((bits >> (8 * b)) & 0xFFu));
        }
    }
}

Matrix read_matrix(const fs::path& path) {
    return path.extension() == ".bin" ? read_binary(path) : read_csv(path);
}

Vector read_vector(const fs::path& path) {
    const Matrix M = read_matrix(path);
    if (M.cols() == 1) return M.col(0);
    if (M.rows() == 1) return M.row(0).transpose();
    if (M.size() == 0) return Vector(0);
    throw IoError(path.string() + ": expected a single row or column, got " + std::to_string(M.rows()) + "x" +
                  std::to_string(M.cols()));
}

Schedule read_schedule(const fs::path& path) {
    const Matrix M = read_csv(path);
    if (M.cols() != 1) throw IoError(path.string() + ": schedule CSV must have exactly one column");
    return Schedule::custom(std::vector<double>(M.data(), M.data() + M.size()));
}

Matrix read_pgm(const fs::path& path) {
    auto in = open_in(path, std::ios::binary);
    auto token = [&]() {
        std::string t;
        int ch;
        while ((ch = in.get()) != EOF) {
            if (ch == '#') {
                while ((ch = in.get()) != EOF && ch != '\n') {}
                continue;
            }
            if (std::isspace(ch)) {
                if (!t.empty()) break;
                continue;
            }
            t.push_back(static_cast<char>(ch));
        }
        return t;
    };
    if (token() != "P5") throw IoError(path.string() + ": not a binary PGM (P5)");
    const int w = std::atoi(token().c_str());
    const int h = std::atoi(token().c_str());
    const int maxval = std::atoi(token().c_str());
    if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255)
        throw IoError(path.string() + ": unsupported PGM header");
    Matrix img(h, w);
    for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) {
            const int ch = in.get();
            if (ch == EOF) throw IoError(path.string() + ": truncated pixel data");
            img(i, j) = static_cast<double>(static_cast<unsigned char>(ch)) / maxval;
        }
    }
    return img;
}

void write_pgm(const fs::path& path, const Matrix& image, const FileHeader* header) {
    auto out = open_out(path, std::ios::binary);
    out << "P5\n";
    if (header) out << header->line() << '\n';
    out << image.cols() << ' ' << image.rows() << "\n255\n";
    for (Index i = 0; i < image.rows(); ++i) {
        for (Index j = 0; j < image.cols(); ++j) {
            const double v = std::clamp(image(i, j), 0.0, 1.0);
            out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
        }
    }
}

namespace {

// {"values": [...]}, {"file": ...} or a bare array
Vector vector_ref(const json& j, const fs::path& base) {
    if (j.is_array() || j.contains("values")) {
        const auto vals = (j.is_array() ? j : j.at("values")).get<std::vector<double>>();
        return Eigen::Map<const Vector>(vals.data(), static_cast<Index>(vals.size()));
    }
    return read_vector(base / j.at("file").get<std::string>());
}

std::vector<Index> index_list(const json& j) {
    std::vector<Index> out;
    for (const auto& v : j) out.push_back(v.get<Index>());
    return out;
}

LinearMapd map_ref(const json& j, const fs::path& base) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "dense") return dense_map<double>(read_matrix(base / j.at("file").get<std::string>()));
    if (kind == "row-sampling") return row_sampling_map<double>(j.at("total").get<Index>(), index_list(j.at("indices")));
    if (kind == "identity") return identity_map<double>(j.at("n").get<Index>());
    if (kind == "dct2d") return dct2d_map<double>(j.at("n").get<Index>());
    if (kind == "dct-rows") return orthonormal_rows(dct2d_map<double>(j.at("n").get<Index>()), index_list(j.at("indices")));
    throw IoError("unknown map kind '" + kind + "'");
}

}  // namespace

Problemd load_problem(const fs::path& path) {
    auto in = open_in(path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
    const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
    try {
        LinearMapd A = map_ref(j.at("A"), base);
        Vector b = vector_ref(j.at("b"), base);
        const json& ju = j.at("U");
        const auto rep = ju.at("representation").get<std::string>();
        std::optional<AffineSubspaced> U;
        if (rep == "orthonormal-rows") {
            LinearMapd C = map_ref(ju.at("C"), base);
            if (C.kind() == MapKind::Dense) C = orthonormal_rows<double>(*C.dense_matrix());
            U = AffineSubspaced::orthonormal_rows(std::move(C), vector_ref(ju.at("d"), base));
        } else if (rep == "hyperplane") {
            U = AffineSubspaced::hyperplane(vector_ref(ju.at("normal"), base), ju.at("offset").get<double>());
        } else if (rep == "basis") {
            U = AffineSubspaced::from_basis(vector_ref(ju.at("anchor"), base),
                                            read_matrix(base / ju.at("basis").at("file").get<std::string>()));
        } else if (rep == "whole") {
            U = AffineSubspaced::whole_space(ju.at("dim").get<Index>());
        } else {
            throw IoError("unknown U representation '" + rep + "'");
        }
        std::optional<double> lip;
        if (j.contains("lip") && j.at("lip").is_number()) lip = j.at("lip").get<double>();
        return Problemd(std::move(A), std::move(b), std::move(*U), lip);
    } catch (const json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

void save_problem(const Problemd& problem, const fs::path& path, bool auto_lip) {
    const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
    const std::string stem = path.stem().string();
    json j;
    write_csv(base / (stem + "_A.csv"), problem.A().to_dense());
    j["A"] = {{"kind", "dense"}, {"file", stem + "_A.csv"}};
    write_csv(base / (stem + "_b.csv"), Matrix(problem.b()));
    j["b"] = {{"file", stem + "_b.csv"}};
    const auto& rep = problem.U().representation();
    if (const auto* rows = std::get_if<AffineSubspaced::OrthonormalRows>(&rep)) {
        write_csv(base / (stem + "_C.csv"), rows->C.to_dense());
        write_csv(base / (stem + "_d.csv"), Matrix(rows->d));
        j["U"] = {{"representation", "orthonormal-rows"},
                  {"C", {{"kind", "dense"}, {"file", stem + "_C.csv"}}},
                  {"d", {{"file", stem + "_d.csv"}}}};
    } else {
        const auto basis = problem.U().to_basis();
        write_csv(base / (stem + "_anchor.csv"), Matrix(basis.anchor));
        write_csv(base / (stem + "_basis.csv"), basis.basis);
        j["U"] = {{"representation", "basis"},
                  {"anchor", {{"file", stem + "_anchor.csv"}}},
                  {"basis", {{"file", stem + "_basis.csv"}}}};
    }
    if (auto_lip) j["lip"] = "auto";
    else j["lip"] = problem.lip();
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

}  // namespace apgkit::io
