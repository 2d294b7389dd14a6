#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vec3.hpp"

namespace meshstego {

enum class MeshFormat { Off, AsciiPly };

class MeshParseError : public std::runtime_error {
public:
    MeshParseError(const std::string& what, std::size_t line, std::size_t col)
        : std::runtime_error(what + " (line " + std::to_string(line) + ", column " +
                             std::to_string(col) + ")"),
          line_(line),
          col_(col) {}
    std::size_t line() const { return line_; }
    std::size_t column() const { return col_; }

private:
    std::size_t line_, col_;
};

// Exact decimal value of a coordinate as read from the source text:
// value = mantissa * 10^exponent10, mantissa trimmed of trailing zeros.
// Meshes built in memory have no decimal info (valid = false).
struct Decimal {
    std::int64_t mantissa = 0;
    int exponent10 = 0;
    bool valid = false;

    // Number of significant fractional digits.
    int fraction_digits() const { return exponent10 < 0 ? -exponent10 : 0; }
};

struct Mesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;
    std::vector<std::array<Decimal, 3>> decimals; // empty for synthetic meshes

    // Adjacency caches, built once at construction; the mesh is immutable
    // afterwards and all queries are read-only.
    std::vector<std::vector<int>> vertex_faces;     // vertex -> incident faces
    std::vector<std::vector<int>> face_edge_adj;    // face -> faces sharing an edge
    std::vector<std::vector<int>> face_vertex_adj;  // face -> faces sharing >= 1 vertex
    std::vector<std::vector<int>> vertex_neighbors; // vertex -> edge-connected vertices

    std::size_t vertex_count() const { return vertices.size(); }
    std::size_t face_count() const { return faces.size(); }
};

namespace detail {

inline void build_adjacency(Mesh& m) {
    const std::size_t nv = m.vertices.size();
    const std::size_t nf = m.faces.size();

    m.vertex_faces.assign(nv, {});
    for (std::size_t f = 0; f < nf; ++f)
        for (int c = 0; c < 3; ++c) m.vertex_faces[m.faces[f][c]].push_back(int(f));

    // Edge map: sorted vertex pair -> incident faces.
    std::map<std::pair<int, int>, std::vector<int>> edges;
    for (std::size_t f = 0; f < nf; ++f) {
        const auto& fc = m.faces[f];
        for (int c = 0; c < 3; ++c) {
            int a = fc[c], b = fc[(c + 1) % 3];
            if (a > b) std::swap(a, b);
            edges[{a, b}].push_back(int(f));
        }
    }

    m.face_edge_adj.assign(nf, {});
    for (const auto& [edge, fs] : edges) {
        for (int f : fs)
            for (int g : fs)
                if (f != g) m.face_edge_adj[f].push_back(g);
    }
    for (auto& adj : m.face_edge_adj) {
        std::sort(adj.begin(), adj.end());
        adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
    }

    m.face_vertex_adj.assign(nf, {});
    for (std::size_t f = 0; f < nf; ++f) {
        auto& adj = m.face_vertex_adj[f];
        for (int c = 0; c < 3; ++c)
            for (int g : m.vertex_faces[m.faces[f][c]])
                if (g != int(f)) adj.push_back(g);
        std::sort(adj.begin(), adj.end());
        adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
    }

    m.vertex_neighbors.assign(nv, {});
    for (const auto& [edge, fs] : edges) {
        m.vertex_neighbors[edge.first].push_back(edge.second);
        m.vertex_neighbors[edge.second].push_back(edge.first);
    }
    for (auto& nb : m.vertex_neighbors) {
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
}

inline void validate_faces(const Mesh& m) {
    for (std::size_t f = 0; f < m.faces.size(); ++f) {
        const auto& fc = m.faces[f];
        for (int c = 0; c < 3; ++c) {
            if (fc[c] < 0 || fc[c] >= int(m.vertices.size()))
                throw std::invalid_argument("face " + std::to_string(f) +
                                            " has vertex index out of range");
        }
        if (fc[0] == fc[1] || fc[1] == fc[2] || fc[0] == fc[2])
            throw std::invalid_argument("face " + std::to_string(f) + " repeats a vertex index");
    }
}

// Whitespace-delimited tokenizer that tracks line/column for error reporting
// and skips '#' comments.
class Tokenizer {
public:
    explicit Tokenizer(std::string_view text) : text_(text) {}

    struct Token {
        std::string_view text;
        std::size_t line, col;
    };

    bool next(Token& tok) {
        skip_space_and_comments();
        if (pos_ >= text_.size()) return false;
        std::size_t start = pos_, line = line_, col = col_;
        while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])))
            advance();
        tok = Token{text_.substr(start, pos_ - start), line, col};
        return true;
    }

    Token require(const char* what) {
        Token tok;
        if (!next(tok)) throw MeshParseError(std::string("unexpected end of input, expected ") + what, line_, col_);
        return tok;
    }

    std::size_t line() const { return line_; }

private:
    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_space_and_comments() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
            } else {
                break;
            }
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0, line_ = 1, col_ = 1;
};

inline long long parse_int_token(const Tokenizer::Token& tok, const char* what) {
    long long value = 0;
    auto [ptr, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), value);
    if (ec != std::errc() || ptr != tok.text.data() + tok.text.size())
        throw MeshParseError(std::string("expected integer ") + what + ", got '" +
                                 std::string(tok.text) + "'",
                             tok.line, tok.col);
    return value;
}

// Parses a decimal token into a double plus its exact decimal form.
// Accepts optional sign, optional fraction, optional e/E exponent.
inline double parse_coord_token(const Tokenizer::Token& tok, Decimal& dec) {
    const std::string_view s = tok.text;
    std::size_t i = 0;
    bool neg = false;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) neg = (s[i++] == '-');

    std::int64_t mant = 0;
    int frac_digits = 0, digits = 0;
    bool overflow = false;
    auto push_digit = [&](char c) {
        if (mant > (INT64_MAX - (c - '0')) / 10)
            overflow = true;
        else
            mant = mant * 10 + (c - '0');
        ++digits;
    };
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) push_digit(s[i++]);
    if (i < s.size() && s[i] == '.') {
        ++i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
            push_digit(s[i++]);
            ++frac_digits;
        }
    }
    int exp10 = 0;
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        ++i;
        bool eneg = false;
        if (i < s.size() && (s[i] == '+' || s[i] == '-')) eneg = (s[i++] == '-');
        if (i >= s.size() || !std::isdigit(static_cast<unsigned char>(s[i])))
            throw MeshParseError("malformed exponent in '" + std::string(s) + "'", tok.line, tok.col);
        int e = 0;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
            e = e * 10 + (s[i++] - '0');
            if (e > 10000) break;
        }
        exp10 = eneg ? -e : e;
    }
    if (i != s.size() || digits == 0)
        throw MeshParseError("expected numeric coordinate, got '" + std::string(s) + "'", tok.line,
                             tok.col);

    dec = Decimal{};
    if (!overflow) {
        int e = exp10 - frac_digits;
        while (mant != 0 && mant % 10 == 0) {
            mant /= 10;
            ++e;
        }
        dec.mantissa = neg ? -mant : mant;
        dec.exponent10 = (mant == 0) ? 0 : e;
        dec.valid = true;
    }

    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw MeshParseError("expected numeric coordinate, got '" + std::string(s) + "'", tok.line,
                             tok.col);
    return value;
}

inline void parse_face_line(Tokenizer& tk, std::vector<std::array<int, 3>>& faces,
                            std::size_t nv) {
    auto cnt = tk.require("face vertex count");
    long long n = parse_int_token(cnt, "face vertex count");
    if (n != 3)
        throw MeshParseError("non-triangular face with " + std::to_string(n) + " vertices",
                             cnt.line, cnt.col);
    std::array<int, 3> fc{};
    for (int c = 0; c < 3; ++c) {
        auto t = tk.require("face vertex index");
        long long idx = parse_int_token(t, "face vertex index");
        if (idx < 0 || idx >= (long long)nv)
            throw MeshParseError("face vertex index " + std::to_string(idx) + " out of range [0, " +
                                     std::to_string(nv) + ")",
                                 t.line, t.col);
        fc[c] = int(idx);
    }
    if (fc[0] == fc[1] || fc[1] == fc[2] || fc[0] == fc[2])
        throw MeshParseError("face repeats a vertex index", cnt.line, cnt.col);
    faces.push_back(fc);
}

inline Mesh parse_off(std::string_view text) {
    Tokenizer tk(text);
    auto header = tk.require("OFF header");
    if (header.text != "OFF")
        throw MeshParseError("malformed header: expected 'OFF', got '" + std::string(header.text) +
                                 "'",
                             header.line, header.col);
    long long nv = parse_int_token(tk.require("vertex count"), "vertex count");
    long long nf = parse_int_token(tk.require("face count"), "face count");
    parse_int_token(tk.require("edge count"), "edge count");
    if (nv < 0 || nf < 0)
        throw MeshParseError("negative element count", header.line, header.col);

    Mesh m;
    m.vertices.reserve(nv);
    m.decimals.reserve(nv);
    for (long long i = 0; i < nv; ++i) {
        Vec3 v;
        std::array<Decimal, 3> d{};
        for (int c = 0; c < 3; ++c) v[c] = parse_coord_token(tk.require("coordinate"), d[c]);
        m.vertices.push_back(v);
        m.decimals.push_back(d);
    }
    for (long long f = 0; f < nf; ++f) parse_face_line(tk, m.faces, m.vertices.size());
    build_adjacency(m);
    return m;
}

inline Mesh parse_ascii_ply(std::string_view text) {
    Tokenizer tk(text);
    auto magic = tk.require("ply header");
    if (magic.text != "ply")
        throw MeshParseError("malformed header: expected 'ply', got '" + std::string(magic.text) +
                                 "'",
                             magic.line, magic.col);

    struct Element {
        std::string name;
        long long count = 0;
        std::vector<std::string> properties; // scalar property names, in order
        bool has_list = false;
    };
    std::vector<Element> elements;
    bool format_seen = false;

    for (;;) {
        auto tok = tk.require("header keyword");
        std::string kw(tok.text);
        if (kw == "comment" || kw == "obj_info") {
            // consume rest of line
            Tokenizer::Token t;
            std::size_t line = tok.line;
            while (true) {
                Tokenizer probe = tk;
                if (!probe.next(t) || t.line != line) break;
                tk.next(t);
            }
        } else if (kw == "format") {
            auto fmt = tk.require("format type");
            auto ver = tk.require("format version");
            if (fmt.text != "ascii" || ver.text != "1.0")
                throw MeshParseError("unsupported PLY format '" + std::string(fmt.text) + " " +
                                         std::string(ver.text) + "' (only ascii 1.0)",
                                     fmt.line, fmt.col);
            format_seen = true;
        } else if (kw == "element") {
            Element el;
            el.name = std::string(tk.require("element name").text);
            el.count = parse_int_token(tk.require("element count"), "element count");
            elements.push_back(el);
        } else if (kw == "property") {
            if (elements.empty())
                throw MeshParseError("property before any element", tok.line, tok.col);
            auto type = tk.require("property type");
            if (type.text == "list") {
                tk.require("list count type");
                tk.require("list value type");
                tk.require("list property name");
                elements.back().has_list = true;
                elements.back().properties.push_back("<list>");
            } else {
                elements.back().properties.push_back(std::string(tk.require("property name").text));
            }
        } else if (kw == "end_header") {
            break;
        } else {
            throw MeshParseError("unknown header keyword '" + kw + "'", tok.line, tok.col);
        }
    }
    if (!format_seen)
        throw MeshParseError("malformed header: missing 'format ascii 1.0'", 1, 1);

    Mesh m;
    for (const auto& el : elements) {
        if (el.name == "vertex") {
            int ix = -1, iy = -1, iz = -1;
            for (std::size_t p = 0; p < el.properties.size(); ++p) {
                if (el.properties[p] == "x") ix = int(p);
                if (el.properties[p] == "y") iy = int(p);
                if (el.properties[p] == "z") iz = int(p);
            }
            if (ix < 0 || iy < 0 || iz < 0)
                throw MeshParseError("vertex element lacks x/y/z properties", 1, 1);
            m.vertices.reserve(el.count);
            m.decimals.reserve(el.count);
            for (long long i = 0; i < el.count; ++i) {
                Vec3 v;
                std::array<Decimal, 3> d{};
                for (std::size_t p = 0; p < el.properties.size(); ++p) {
                    Decimal dtmp;
                    auto tok = tk.require("vertex property");
                    double val = parse_coord_token(tok, dtmp);
                    if (int(p) == ix) v.x = val, d[0] = dtmp;
                    if (int(p) == iy) v.y = val, d[1] = dtmp;
                    if (int(p) == iz) v.z = val, d[2] = dtmp;
                }
                m.vertices.push_back(v);
                m.decimals.push_back(d);
            }
        } else if (el.name == "face") {
            for (long long f = 0; f < el.count; ++f) parse_face_line(tk, m.faces, m.vertices.size());
        } else {
            // Unknown element: skip one whitespace-delimited token per scalar
            // property per row. Rows with lists cannot be skipped reliably.
            if (el.has_list)
                throw MeshParseError("unsupported list property on element '" + el.name + "'", 1, 1);
            for (long long i = 0; i < el.count; ++i)
                for (std::size_t p = 0; p < el.properties.size(); ++p) tk.require("element row");
        }
    }
    build_adjacency(m);
    return m;
}

// Fixed-point formatting with exactly k fractional digits, printed from the
// rounded integer so that write -> parse -> integer map is lossless.
inline void format_fixed(std::string& out, double value, int k) {
    long double scaled = (long double)value;
    for (int i = 0; i < k; ++i) scaled *= 10.0L;
    long long n = std::llroundl(scaled);
    unsigned long long mag = n < 0 ? (unsigned long long)(-(n + 1)) + 1ull : (unsigned long long)n;
    char buf[32];
    int len = 0;
    if (mag == 0)
        buf[len++] = '0';
    else
        while (mag != 0) {
            buf[len++] = char('0' + mag % 10);
            mag /= 10;
        }
    while (len <= k) buf[len++] = '0'; // pad to at least one integer digit
    if (n < 0) out.push_back('-');
    for (int i = len - 1; i >= k; --i) out.push_back(buf[i]);
    if (k > 0) {
        out.push_back('.');
        for (int i = k - 1; i >= 0; --i) out.push_back(buf[i]);
    }
}

} // namespace detail

inline Mesh make_mesh(std::vector<Vec3> vertices, std::vector<std::array<int, 3>> faces) {
    Mesh m;
    m.vertices = std::move(vertices);
    m.faces = std::move(faces);
    detail::validate_faces(m);
    detail::build_adjacency(m);
    return m;
}

inline Mesh parse_mesh(std::string_view text, MeshFormat format) {
    return format == MeshFormat::Off ? detail::parse_off(text) : detail::parse_ascii_ply(text);
}

inline std::string write_mesh(const Mesh& m, MeshFormat format, int k_star) {
    std::string out;
    out.reserve(m.vertices.size() * 3 * (k_star + 4) + m.faces.size() * 16 + 64);
    if (format == MeshFormat::Off) {
        out += "OFF\n";
        out += std::to_string(m.vertices.size()) + " " + std::to_string(m.faces.size()) + " 0\n";
    } else {
        out += "ply\nformat ascii 1.0\n";
        out += "element vertex " + std::to_string(m.vertices.size()) + "\n";
        out += "property float x\nproperty float y\nproperty float z\n";
        out += "element face " + std::to_string(m.faces.size()) + "\n";
        out += "property list uchar int vertex_indices\nend_header\n";
    }
    for (const auto& v : m.vertices) {
        for (int c = 0; c < 3; ++c) {
            if (c) out.push_back(' ');
            detail::format_fixed(out, v[c], k_star);
        }
        out.push_back('\n');
    }
    for (const auto& f : m.faces) {
        out += "3 " + std::to_string(f[0]) + " " + std::to_string(f[1]) + " " +
               std::to_string(f[2]) + "\n";
    }
    return out;
}

inline const std::vector<int>& one_ring_faces(const Mesh& m, int vertex) {
    if (vertex < 0 || vertex >= int(m.vertices.size()))
        throw std::out_of_range("vertex index out of range");
    return m.vertex_faces[vertex];
}

inline const std::vector<int>& edge_adjacent_faces(const Mesh& m, int face) {
    if (face < 0 || face >= int(m.faces.size()))
        throw std::out_of_range("face index out of range");
    return m.face_edge_adj[face];
}

inline const std::vector<int>& vertex_adjacent_faces(const Mesh& m, int face) {
    if (face < 0 || face >= int(m.faces.size()))
        throw std::out_of_range("face index out of range");
    return m.face_vertex_adj[face];
}

} // namespace meshstego
