#include "staredge/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "staredge/error.hpp"
#include "staredge/kdtree.hpp"

namespace staredge {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::istringstream stream(line);
    std::string tok;
    while (stream >> tok) fields.push_back(tok);
    return fields;
}

double parse_double(const std::string& tok, const char* what, std::size_t line_no) {
    double value = 0.0;
    const char* begin = tok.data();
    const char* end = begin + tok.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        throw ParseError("line " + std::to_string(line_no) + ": cannot parse " + what + " '" +
                         tok + "'");
    }
    return value;
}

std::uint8_t parse_label(const std::string& tok, std::size_t line_no) {
    const double v = parse_double(tok, "label", line_no);
    if (v != 0.0 && v != 1.0) {
        throw ParseError("line " + std::to_string(line_no) + ": label must be 0 or 1, got '" +
                         tok + "'");
    }
    return v != 0.0 ? 1 : 0;
}

void check_unit_normal(const Vec3& n, std::size_t line_no) {
    if (std::abs(n.norm() - 1.0) > 1e-6) {
        throw FormatError("line " + std::to_string(line_no) + ": normal is not unit length");
    }
}

void append_full_precision(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
}

std::ifstream open_for_read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    return in;
}

}  // namespace

PointCloud read_xyz(const std::filesystem::path& path) {
    std::ifstream in = open_for_read(path);
    PointCloud cloud;
    std::string line;
    std::size_t line_no = 0;
    std::size_t columns = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto fields = split_fields(line);
        if (fields.empty()) continue;

        if (columns == 0) {
            columns = fields.size();
            if (columns != 3 && columns != 4 && columns != 6) {
                throw FormatError("line " + std::to_string(line_no) + ": expected 3, 4 or 6 columns, got " +
                                  std::to_string(fields.size()));
            }
        } else if (fields.size() != columns) {
            throw FormatError("line " + std::to_string(line_no) + ": inconsistent column count (" +
                              std::to_string(fields.size()) + " vs " + std::to_string(columns) + ")");
        }

        Vec3 p(parse_double(fields[0], "x", line_no), parse_double(fields[1], "y", line_no),
               parse_double(fields[2], "z", line_no));
        cloud.points.push_back(p);
        if (columns == 4) {
            cloud.labels.push_back(parse_label(fields[3], line_no));
        } else if (columns == 6) {
            Vec3 n(parse_double(fields[3], "nx", line_no), parse_double(fields[4], "ny", line_no),
                   parse_double(fields[5], "nz", line_no));
            check_unit_normal(n, line_no);
            cloud.normals.push_back(n);
        }
    }
    return cloud;
}

void write_xyz(const PointCloud& cloud, const std::filesystem::path& path) {
    cloud.validate();
    if (cloud.has_labels() && cloud.has_normals()) {
        throw ArgumentError("xyz format stores labels or normals, not both; use ply");
    }

    std::ofstream out = open_for_write(path);
    std::string buf;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        buf.clear();
        const Vec3& p = cloud.points[i];
        for (int c = 0; c < 3; ++c) {
            if (c) buf += ' ';
            append_full_precision(buf, p[c]);
        }
        if (cloud.has_labels()) {
            buf += ' ';
            buf += cloud.labels[i] ? '1' : '0';
        } else if (cloud.has_normals()) {
            for (int c = 0; c < 3; ++c) {
                buf += ' ';
                append_full_precision(buf, cloud.normals[i][c]);
            }
        }
        buf += '\n';
        out << buf;
    }
    out.flush();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

namespace {

struct PlyHeader {
    std::size_t vertex_count = 0;
    bool has_normals = false;
    bool has_label = false;
};

PlyHeader read_ply_header(std::ifstream& in, std::size_t& line_no) {
    std::string line;
    if (!std::getline(in, line) || line != "ply") {
        throw UnsupportedFormatError("missing 'ply' magic line");
    }
    ++line_no;

    PlyHeader header;
    bool saw_format = false;
    bool in_vertex = false;
    bool saw_vertex = false;
    std::vector<std::string> props;

    while (std::getline(in, line)) {
        ++line_no;
        const auto fields = split_fields(line);
        if (fields.empty()) continue;
        if (fields[0] == "comment") continue;

        if (fields[0] == "format") {
            if (fields.size() < 3 || fields[1] != "ascii" || fields[2] != "1.0") {
                throw UnsupportedFormatError("only 'format ascii 1.0' is supported");
            }
            saw_format = true;
        } else if (fields[0] == "element") {
            if (fields.size() < 3 || fields[1] != "vertex") {
                throw UnsupportedFormatError("only 'element vertex' is supported");
            }
            if (saw_vertex) throw UnsupportedFormatError("multiple vertex elements");
            header.vertex_count = static_cast<std::size_t>(
                parse_double(fields[2], "vertex count", line_no));
            saw_vertex = true;
            in_vertex = true;
        } else if (fields[0] == "property") {
            if (!in_vertex || fields.size() != 3) {
                throw UnsupportedFormatError("unsupported property declaration");
            }
            const std::string& type = fields[1];
            const std::string& name = fields[2];
            if (name == "label") {
                if (type != "uchar" && type != "uint8") {
                    throw UnsupportedFormatError("label property must be uchar");
                }
            } else if (type != "float" && type != "double") {
                throw UnsupportedFormatError("coordinate properties must be float or double");
            }
            props.push_back(name);
        } else if (fields[0] == "end_header") {
            if (!saw_format) throw UnsupportedFormatError("missing format line");
            if (!saw_vertex) throw UnsupportedFormatError("missing 'element vertex'");

            std::vector<std::string> expected = {"x", "y", "z"};
            if (props.size() == 6 || props.size() == 7) {
                expected.insert(expected.end(), {"nx", "ny", "nz"});
                header.has_normals = true;
            }
            if (props.size() == 4 || props.size() == 7) {
                expected.push_back("label");
                header.has_label = true;
            }
            if (props != expected) {
                throw UnsupportedFormatError(
                    "vertex properties must be x y z [nx ny nz] [label]");
            }
            return header;
        } else {
            throw UnsupportedFormatError("unsupported header line '" + fields[0] + "'");
        }
    }
    throw UnsupportedFormatError("missing end_header");
}

}  // namespace

PointCloud read_ply(const std::filesystem::path& path) {
    std::ifstream in = open_for_read(path);
    std::size_t line_no = 0;
    const PlyHeader header = read_ply_header(in, line_no);

    PointCloud cloud;
    cloud.points.reserve(header.vertex_count);
    std::string line;
    while (cloud.points.size() < header.vertex_count) {
        if (!std::getline(in, line)) {
            throw FormatError("unexpected end of file: expected " +
                              std::to_string(header.vertex_count) + " vertices, got " +
                              std::to_string(cloud.points.size()));
        }
        ++line_no;
        const auto fields = split_fields(line);
        if (fields.empty()) continue;
        const std::size_t expected = 3 + (header.has_normals ? 3 : 0) + (header.has_label ? 1 : 0);
        if (fields.size() != expected) {
            throw FormatError("line " + std::to_string(line_no) + ": expected " +
                              std::to_string(expected) + " vertex fields");
        }

        std::size_t f = 0;
        Vec3 p(parse_double(fields[f], "x", line_no), parse_double(fields[f + 1], "y", line_no),
               parse_double(fields[f + 2], "z", line_no));
        f += 3;
        cloud.points.push_back(p);
        if (header.has_normals) {
            Vec3 n(parse_double(fields[f], "nx", line_no),
                   parse_double(fields[f + 1], "ny", line_no),
                   parse_double(fields[f + 2], "nz", line_no));
            check_unit_normal(n, line_no);
            cloud.normals.push_back(n);
            f += 3;
        }
        if (header.has_label) cloud.labels.push_back(parse_label(fields[f], line_no));
    }
    return cloud;
}

void write_ply(const PointCloud& cloud, const std::filesystem::path& path) {
    cloud.validate();
    std::ofstream out = open_for_write(path);

    out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size() << "\n"
        << "property float x\nproperty float y\nproperty float z\n";
    if (cloud.has_normals()) {
        out << "property float nx\nproperty float ny\nproperty float nz\n";
    }
    if (cloud.has_labels()) out << "property uchar label\n";
    out << "end_header\n";

    std::string buf;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        buf.clear();
        for (int c = 0; c < 3; ++c) {
            if (c) buf += ' ';
            append_full_precision(buf, cloud.points[i][c]);
        }
        if (cloud.has_normals()) {
            for (int c = 0; c < 3; ++c) {
                buf += ' ';
                append_full_precision(buf, cloud.normals[i][c]);
            }
        }
        if (cloud.has_labels()) {
            buf += ' ';
            buf += cloud.labels[i] ? '1' : '0';
        }
        buf += '\n';
        out << buf;
    }
    out.flush();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

PointCloud label_ground_truth(const PointCloud& cloud, const GroundTruthEdges& gt,
                              double threshold) {
    if (threshold <= 0.0) throw ArgumentError("label threshold must be positive");
    if (gt.empty()) throw ArgumentError("ground-truth edge set is empty");
    if (cloud.points.empty()) throw ArgumentError("cannot label an empty cloud");

    const KdTree tree(gt.all_vertices());
    PointCloud labeled = cloud;
    labeled.labels.assign(cloud.size(), 0);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (tree.nearest(cloud.points[i]).distance <= threshold) labeled.labels[i] = 1;
    }
    return labeled;
}

}  // namespace staredge
