#include "floorloc/io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace floorloc {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) throw IoError("cannot open " + path);
    return in;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode);
    if (!out) throw IoError("cannot write " + path);
    return out;
}

double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("bad number '" + s + "' in " + what);
    }
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

double require_double(const KeyValueMap& kv, const std::string& key, const std::string& path) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ParseError("missing key '" + key + "' in " + path);
    return parse_double(it->second, path);
}

}  // namespace

KeyValueMap load_keyvalue(const std::string& path) {
    auto in = open_in(path);
    KeyValueMap kv;
    std::string line;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ParseError("expected key=value in " + path);
        kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    return kv;
}

void save_keyvalue(const std::string& path, const KeyValueMap& kv) {
    auto out = open_out(path);
    for (const auto& [k, v] : kv) out << k << "=" << v << "\n";
}

CameraIntrinsics load_intrinsics(const std::string& path) {
    const KeyValueMap kv = load_keyvalue(path);
    CameraIntrinsics K;
    K.fx = require_double(kv, "fx", path);
    K.fy = require_double(kv, "fy", path);
    K.cx = require_double(kv, "cx", path);
    K.cy = require_double(kv, "cy", path);
    K.width = static_cast<int>(require_double(kv, "width", path));
    K.height = static_cast<int>(require_double(kv, "height", path));
    K.validate();
    return K;
}

void save_intrinsics(const std::string& path, const CameraIntrinsics& K) {
    auto out = open_out(path);
    out.precision(17);
    out << "fx=" << K.fx << "\nfy=" << K.fy << "\ncx=" << K.cx << "\ncy=" << K.cy
        << "\nwidth=" << K.width << "\nheight=" << K.height << "\n";
}

std::vector<RigidPose3> load_poses(const std::string& path) {
    auto in = open_in(path);
    std::vector<double> numbers;
    std::string line;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::stringstream ss(t);
        double v;
        while (ss >> v) numbers.push_back(v);
    }
    if (numbers.empty() || numbers.size() % 16 != 0)
        throw ParseError("pose file must hold 4x4 matrices: " + path);
    std::vector<RigidPose3> poses;
    for (std::size_t off = 0; off < numbers.size(); off += 16) {
        RigidPose3 p;
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) p.rotation(r, c) = numbers[off + 4 * r + c];
            p.translation(r) = numbers[off + 4 * r + 3];
        }
        const double w = numbers[off + 15];
        if (numbers[off + 12] != 0.0 || numbers[off + 13] != 0.0 ||
            numbers[off + 14] != 0.0 || w != 1.0)
            throw ParseError("bottom row of a pose must be 0 0 0 1: " + path);
        p.validate(1e-6);
        poses.push_back(p);
    }
    return poses;
}

void save_poses(const std::string& path, const std::vector<RigidPose3>& poses) {
    auto out = open_out(path);
    out.precision(17);
    for (const RigidPose3& p : poses) {
        for (int r = 0; r < 3; ++r)
            out << p.rotation(r, 0) << " " << p.rotation(r, 1) << " " << p.rotation(r, 2)
                << " " << p.translation(r) << "\n";
        out << "0 0 0 1\n";
    }
}

// ---- PNG helpers -----------------------------------------------------------

namespace {

struct GrayImage {
    int width = 0;
    int height = 0;
    int bit_depth = 8;
    std::vector<std::uint16_t> pixels;  // row-major
};

GrayImage read_png_gray(const std::string& path) {
    FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) throw IoError("cannot open " + path);
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw IoError("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw IoError("failed to decode " + path);
    }
    png_init_io(png, fp);
    png_read_info(png, info);

    const int color = png_get_color_type(png, info);
    int depth = png_get_bit_depth(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color & PNG_COLOR_MASK_COLOR) png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (depth == 16) png_set_swap(png);  // stored big-endian
    png_read_update_info(png, info);
    depth = png_get_bit_depth(png, info);

    GrayImage img;
    img.width = static_cast<int>(png_get_image_width(png, info));
    img.height = static_cast<int>(png_get_image_height(png, info));
    img.bit_depth = depth;
    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);

    std::vector<std::uint8_t> row(png_get_rowbytes(png, info));
    for (int y = 0; y < img.height; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (int x = 0; x < img.width; ++x) {
            std::uint16_t v;
            if (depth == 16)
                std::memcpy(&v, row.data() + 2 * x, 2);
            else
                v = row[static_cast<std::size_t>(x)];
            img.pixels[static_cast<std::size_t>(y) * img.width + x] = v;
        }
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    return img;
}

void write_png_gray(const std::string& path, const GrayImage& img) {
    FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw IoError("cannot write " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw IoError("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw IoError("failed to encode " + path);
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
                 static_cast<png_uint_32>(img.height), img.bit_depth,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    if (img.bit_depth == 16) png_set_swap(png);

    std::vector<std::uint8_t> row(static_cast<std::size_t>(img.width) *
                                  (img.bit_depth == 16 ? 2 : 1));
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const std::uint16_t v = img.pixels[static_cast<std::size_t>(y) * img.width + x];
            if (img.bit_depth == 16)
                std::memcpy(row.data() + 2 * x, &v, 2);
            else
                row[static_cast<std::size_t>(x)] = static_cast<std::uint8_t>(v);
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

bool has_suffix(const std::string& s, const std::string& suffix) {
    if (s.size() < suffix.size()) return false;
    std::string tail = s.substr(s.size() - suffix.size());
    std::transform(tail.begin(), tail.end(), tail.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return tail == suffix;
}

GrayImage read_pgm(const std::string& path) {
    auto in = open_in(path, std::ios::binary);
    std::string magic;
    in >> magic;
    if (magic != "P5" && magic != "P2") throw ParseError("not a PGM file: " + path);
    auto next_token = [&in, &path]() {
        std::string tok;
        while (in >> tok) {
            if (tok[0] == '#') {
                std::string rest;
                std::getline(in, rest);
                continue;
            }
            return tok;
        }
        throw ParseError("truncated PGM header: " + path);
    };
    GrayImage img;
    img.width = static_cast<int>(parse_double(next_token(), path));
    img.height = static_cast<int>(parse_double(next_token(), path));
    const int maxval = static_cast<int>(parse_double(next_token(), path));
    if (img.width < 1 || img.height < 1 || maxval < 1 || maxval > 255)
        throw ParseError("unsupported PGM geometry: " + path);
    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
    if (magic == "P5") {
        in.get();  // single whitespace after maxval
        std::vector<std::uint8_t> raw(img.pixels.size());
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
        if (!in) throw ParseError("truncated PGM data: " + path);
        for (std::size_t i = 0; i < raw.size(); ++i) img.pixels[i] = raw[i];
    } else {
        for (auto& p : img.pixels) {
            int v;
            if (!(in >> v)) throw ParseError("truncated PGM data: " + path);
            p = static_cast<std::uint16_t>(v);
        }
    }
    return img;
}

void write_pgm(const std::string& path, const GrayImage& img) {
    auto out = open_out(path, std::ios::binary);
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    std::vector<std::uint8_t> raw(img.pixels.size());
    for (std::size_t i = 0; i < raw.size(); ++i)
        raw[i] = static_cast<std::uint8_t>(std::min<std::uint16_t>(img.pixels[i], 255));
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

GrayImage read_gray_any(const std::string& path) {
    if (has_suffix(path, ".pgm")) return read_pgm(path);
    if (has_suffix(path, ".png")) return read_png_gray(path);
    throw IoError("unsupported raster format (want .pgm or .png): " + path);
}

void write_gray_any(const std::string& path, const GrayImage& img) {
    if (has_suffix(path, ".pgm")) {
        write_pgm(path, img);
        return;
    }
    if (has_suffix(path, ".png")) {
        write_png_gray(path, img);
        return;
    }
    throw IoError("unsupported raster format (want .pgm or .png): " + path);
}

}  // namespace

DepthImage load_depth_png(const std::string& path) {
    const GrayImage img = read_png_gray(path);
    DepthImage depth(img.width, img.height);
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        depth.values[i] = img.pixels[i] / 1000.0;  // millimeters -> meters
    return depth;
}

void save_depth_png(const std::string& path, const DepthImage& depth) {
    GrayImage img;
    img.width = depth.width;
    img.height = depth.height;
    img.bit_depth = 16;
    img.pixels.resize(depth.values.size());
    for (std::size_t i = 0; i < depth.values.size(); ++i) {
        const double mm = std::clamp(depth.values[i] * 1000.0, 0.0, 65535.0);
        img.pixels[i] = static_cast<std::uint16_t>(std::lround(mm));
    }
    write_png_gray(path, img);
}

OccupancyGrid load_floorplan(const std::string& raster_path, const std::string& meta_path,
                             const std::string& mask_path) {
    const GrayImage img = read_gray_any(raster_path);
    const KeyValueMap kv = load_keyvalue(meta_path);
    OccupancyGrid grid(img.width, img.height, require_double(kv, "resolution_m", meta_path),
                       Cell::Free, require_double(kv, "origin_x_m", meta_path),
                       require_double(kv, "origin_y_m", meta_path));
    for (int r = 0; r < img.height; ++r) {
        const int cy = img.height - 1 - r;  // image row 0 = top of the map
        for (int x = 0; x < img.width; ++x)
            grid.at(x, cy) = img.pixels[static_cast<std::size_t>(r) * img.width + x] < 128
                                 ? Cell::Occupied
                                 : Cell::Free;
    }
    if (!mask_path.empty()) {
        const GrayImage mask = read_gray_any(mask_path);
        if (mask.width != img.width || mask.height != img.height)
            throw ParseError("unknown-mask size differs from floorplan: " + mask_path);
        for (int r = 0; r < mask.height; ++r) {
            const int cy = mask.height - 1 - r;
            for (int x = 0; x < mask.width; ++x)
                if (mask.pixels[static_cast<std::size_t>(r) * mask.width + x] >= 128)
                    grid.at(x, cy) = Cell::Unknown;
        }
    }
    grid.validate();
    return grid;
}

void save_floorplan(const std::string& raster_path, const std::string& meta_path,
                    const OccupancyGrid& grid) {
    GrayImage img;
    img.width = grid.width;
    img.height = grid.height;
    img.bit_depth = 8;
    img.pixels.resize(grid.cells.size());
    for (int r = 0; r < grid.height; ++r) {
        const int cy = grid.height - 1 - r;
        for (int x = 0; x < grid.width; ++x)
            img.pixels[static_cast<std::size_t>(r) * grid.width + x] =
                grid.at(x, cy) == Cell::Free ? 255 : 0;
    }
    write_gray_any(raster_path, img);
    KeyValueMap kv;
    std::ostringstream res, ox, oy;
    res.precision(17);
    ox.precision(17);
    oy.precision(17);
    res << grid.resolution;
    ox << grid.origin_x;
    oy << grid.origin_y;
    kv["resolution_m"] = res.str();
    kv["origin_x_m"] = ox.str();
    kv["origin_y_m"] = oy.str();
    save_keyvalue(meta_path, kv);
}

RayScan load_scan_csv(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || split(line, ',').size() != 2)
        throw ParseError("expected header angle_rad,depth_m: " + path);
    RayScan scan;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 2) throw ParseError("bad scan row in " + path);
        scan.angles.push_back(parse_double(f[0], path));
        scan.depths.push_back(parse_double(f[1], path));
    }
    if (scan.angles.empty()) throw ParseError("empty scan: " + path);
    if (scan.angles.size() >= 2) {
        const double spacing = scan.angles[1] - scan.angles[0];
        const double span = scan.angles.back() - scan.angles.front();
        scan.fov = std::abs(span + spacing - 2.0 * M_PI) <= 1e-9 ? 2.0 * M_PI : span;
    }
    scan.validate();
    return scan;
}

void save_scan_csv(const std::string& path, const RayScan& scan) {
    auto out = open_out(path);
    out.precision(17);
    out << "angle_rad,depth_m\n";
    for (std::size_t i = 0; i < scan.angles.size(); ++i)
        out << scan.angles[i] << "," << scan.depths[i] << "\n";
}

void save_correspondences_csv(const std::string& path, const PixelCorrespondenceSet& set) {
    auto out = open_out(path);
    out << "ua,va,ub,vb\n";
    for (const auto& [a, b] : set.pairs)
        out << a.u << "," << a.v << "," << b.u << "," << b.v << "\n";
}

void save_pairs_csv(const std::string& path, const std::vector<MinedPair>& pairs) {
    auto out = open_out(path);
    out.precision(17);
    out << "frame_a,frame_b,ratio\n";
    for (const auto& p : pairs) out << p.frame_a << "," << p.frame_b << "," << p.ratio << "\n";
}

MatchSet load_matches_csv(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty match file: " + path);
    MatchSet M;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 2) throw ParseError("bad match row in " + path);
        M.pairs.emplace_back(static_cast<int>(parse_double(f[0], path)),
                             static_cast<int>(parse_double(f[1], path)));
    }
    return M;
}

void save_matches_csv(const std::string& path, const MatchSet& matches) {
    auto out = open_out(path);
    out << "i,j\n";
    for (const auto& [i, j] : matches.pairs) out << i << "," << j << "\n";
}

std::vector<LocalizationRecord> load_records_csv(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty records file: " + path);
    std::vector<LocalizationRecord> records;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 8) throw ParseError("bad record row in " + path);
        LocalizationRecord r;
        r.sequence = static_cast<int>(parse_double(f[0], path));
        r.step = static_cast<int>(parse_double(f[1], path));
        r.estimate = {parse_double(f[2], path), parse_double(f[3], path),
                      parse_double(f[4], path)};
        r.ground_truth = {parse_double(f[5], path), parse_double(f[6], path),
                          parse_double(f[7], path)};
        records.push_back(r);
    }
    return records;
}

void save_records_csv(const std::string& path, std::span<const LocalizationRecord> records) {
    auto out = open_out(path);
    out.precision(17);
    out << "seq,step,est_x,est_y,est_phi,gt_x,gt_y,gt_phi\n";
    for (const auto& r : records)
        out << r.sequence << "," << r.step << "," << r.estimate.x << "," << r.estimate.y
            << "," << r.estimate.phi << "," << r.ground_truth.x << "," << r.ground_truth.y
            << "," << r.ground_truth.phi << "\n";
}

PointCloud load_xyz(const std::string& path) {
    auto in = open_in(path);
    PointCloud cloud;
    std::string line;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::stringstream ss(t);
        double x, y, z;
        if (!(ss >> x >> y >> z)) throw ParseError("bad XYZ row in " + path);
        cloud.points.emplace_back(x, y, z);
    }
    return cloud;
}

void save_xyz(const std::string& path, const PointCloud& cloud) {
    auto out = open_out(path);
    out.precision(17);
    for (const Vec3& p : cloud.points) out << p.x() << " " << p.y() << " " << p.z() << "\n";
}

namespace {

void write_exact(std::ofstream& out, const void* data, std::size_t bytes) {
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(bytes));
}

void read_exact(std::ifstream& in, void* data, std::size_t bytes, const std::string& path) {
    in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(bytes));
    if (static_cast<std::size_t>(in.gcount()) != bytes) throw ParseError("truncated " + path);
}

void check_magic(std::ifstream& in, const char* magic, const std::string& path) {
    char buf[4];
    read_exact(in, buf, 4, path);
    if (std::memcmp(buf, magic, 4) != 0)
        throw ParseError(std::string("bad magic, expected ") + magic + ": " + path);
}

}  // namespace

FeatureMap load_features(const std::string& path) {
    auto in = open_in(path, std::ios::binary);
    check_magic(in, "FEAT", path);
    std::uint32_t n = 0, f = 0;
    read_exact(in, &n, 4, path);
    read_exact(in, &f, 4, path);
    FeatureMap map(static_cast<int>(n), static_cast<int>(f));
    std::vector<float> raw(static_cast<std::size_t>(n) * f);
    read_exact(in, raw.data(), raw.size() * 4, path);
    for (std::size_t i = 0; i < raw.size(); ++i) map.data[i] = raw[i];
    map.validate();
    return map;
}

void save_features(const std::string& path, const FeatureMap& features) {
    auto out = open_out(path, std::ios::binary);
    write_exact(out, "FEAT", 4);
    const std::uint32_t n = static_cast<std::uint32_t>(features.count);
    const std::uint32_t f = static_cast<std::uint32_t>(features.dim);
    write_exact(out, &n, 4);
    write_exact(out, &f, 4);
    std::vector<float> raw(features.data.size());
    for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = static_cast<float>(features.data[i]);
    write_exact(out, raw.data(), raw.size() * 4);
}

DepthDistribution load_distribution(const std::string& path) {
    auto in = open_in(path, std::ios::binary);
    check_magic(in, "PDEP", path);
    std::uint32_t v = 0, k = 0;
    read_exact(in, &v, 4, path);
    read_exact(in, &k, 4, path);
    std::vector<float> grid(k), probs(static_cast<std::size_t>(v) * k);
    read_exact(in, grid.data(), grid.size() * 4, path);
    read_exact(in, probs.data(), probs.size() * 4, path);
    DepthDistribution dist(static_cast<int>(v),
                           std::vector<double>(grid.begin(), grid.end()));
    for (std::size_t i = 0; i < probs.size(); ++i) dist.probs[i] = probs[i];
    for (int i = 0; i < dist.rays; ++i) {  // float32 storage: renormalize rows
        auto row = dist.row(i);
        double sum = 0.0;
        for (double p : row) sum += p;
        if (!(sum > 0.0)) throw ParseError("empty distribution row in " + path);
        for (double& p : row) p /= sum;
    }
    dist.validate();
    return dist;
}

void save_distribution(const std::string& path, const DepthDistribution& dist) {
    auto out = open_out(path, std::ios::binary);
    write_exact(out, "PDEP", 4);
    const std::uint32_t v = static_cast<std::uint32_t>(dist.rays);
    const std::uint32_t k = static_cast<std::uint32_t>(dist.hypotheses);
    write_exact(out, &v, 4);
    write_exact(out, &k, 4);
    std::vector<float> grid(dist.depth_grid.begin(), dist.depth_grid.end());
    write_exact(out, grid.data(), grid.size() * 4);
    std::vector<float> probs(dist.probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = static_cast<float>(dist.probs[i]);
    write_exact(out, probs.data(), probs.size() * 4);
}

PosteriorDump load_posterior(const std::string& path) {
    auto in = open_in(path, std::ios::binary);
    check_magic(in, "POST", path);
    std::uint32_t h = 0, w = 0, o = 0;
    read_exact(in, &h, 4, path);
    read_exact(in, &w, 4, path);
    read_exact(in, &o, 4, path);
    PosteriorDump dump;
    dump.height = static_cast<int>(h);
    dump.width = static_cast<int>(w);
    dump.bins = static_cast<int>(o);
    dump.probs.resize(static_cast<std::size_t>(h) * w * o);
    read_exact(in, dump.probs.data(), dump.probs.size() * 4, path);
    return dump;
}

void save_posterior(const std::string& path, const PosteriorGrid& post) {
    auto out = open_out(path, std::ios::binary);
    write_exact(out, "POST", 4);
    const std::uint32_t h = static_cast<std::uint32_t>(post.height);
    const std::uint32_t w = static_cast<std::uint32_t>(post.width);
    const std::uint32_t o = static_cast<std::uint32_t>(post.bins);
    write_exact(out, &h, 4);
    write_exact(out, &w, 4);
    write_exact(out, &o, 4);
    std::vector<float> probs(post.probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = static_cast<float>(post.probs[i]);
    write_exact(out, probs.data(), probs.size() * 4);
}

namespace {

void write_heatmap(const std::string& path, int width, int height,
                   const std::vector<double>& cell_max) {
    double peak = 0.0;
    for (double v : cell_max) peak = std::max(peak, v);
    GrayImage img;
    img.width = width;
    img.height = height;
    img.bit_depth = 8;
    img.pixels.resize(cell_max.size());
    for (int r = 0; r < height; ++r) {
        const int cy = height - 1 - r;
        for (int x = 0; x < width; ++x) {
            const double v = cell_max[static_cast<std::size_t>(cy) * width + x];
            img.pixels[static_cast<std::size_t>(r) * width + x] = static_cast<std::uint16_t>(
                peak > 0.0 ? std::lround(255.0 * v / peak) : 0);
        }
    }
    write_pgm(path, img);
}

}  // namespace

void save_heatmap_pgm(const std::string& path, const PosteriorGrid& post) {
    std::vector<double> cell_max(static_cast<std::size_t>(post.width) * post.height, 0.0);
    for (int cy = 0; cy < post.height; ++cy)
        for (int cx = 0; cx < post.width; ++cx)
            for (int b = 0; b < post.bins; ++b)
                cell_max[static_cast<std::size_t>(cy) * post.width + cx] =
                    std::max(cell_max[static_cast<std::size_t>(cy) * post.width + cx],
                             post.at(cx, cy, b));
    write_heatmap(path, post.width, post.height, cell_max);
}

void save_heatmap_pgm(const std::string& path, const PosteriorDump& dump) {
    std::vector<double> cell_max(static_cast<std::size_t>(dump.width) * dump.height, 0.0);
    for (int cy = 0; cy < dump.height; ++cy)
        for (int cx = 0; cx < dump.width; ++cx)
            for (int b = 0; b < dump.bins; ++b) {
                const std::size_t i =
                    (static_cast<std::size_t>(cy) * dump.width + cx) * dump.bins + b;
                cell_max[static_cast<std::size_t>(cy) * dump.width + cx] = std::max(
                    cell_max[static_cast<std::size_t>(cy) * dump.width + cx],
                    static_cast<double>(dump.probs[i]));
            }
    write_heatmap(path, dump.width, dump.height, cell_max);
}

void save_trajectory(const std::string& csv_path, const Trajectory& traj) {
    const std::filesystem::path csv(csv_path);
    const std::filesystem::path dir = csv.parent_path();
    auto out = open_out(csv_path);
    out.precision(17);
    out << "step,x,y,phi,dx,dy,dphi,scan\n";
    for (std::size_t t = 0; t < traj.steps.size(); ++t) {
        const TrajectoryStep& s = traj.steps[t];
        char name[32];
        std::snprintf(name, sizeof(name), "scan_%04zu.csv", t);
        save_scan_csv((dir / name).string(), s.observation);
        out << t << "," << s.gt.x << "," << s.gt.y << "," << s.gt.phi << "," << s.delta.dx
            << "," << s.delta.dy << "," << s.delta.dphi << "," << name << "\n";
    }
}

Trajectory load_trajectory(const std::string& csv_path) {
    const std::filesystem::path dir = std::filesystem::path(csv_path).parent_path();
    auto in = open_in(csv_path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty trajectory file: " + csv_path);
    Trajectory traj;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 8) throw ParseError("bad trajectory row in " + csv_path);
        TrajectoryStep s;
        s.gt = {parse_double(f[1], csv_path), parse_double(f[2], csv_path),
                parse_double(f[3], csv_path)};
        s.delta = {parse_double(f[4], csv_path), parse_double(f[5], csv_path),
                   parse_double(f[6], csv_path), 0.0, 0.0};
        s.observation = load_scan_csv((dir / f[7]).string());
        traj.steps.push_back(std::move(s));
    }
    return traj;
}

}  // namespace floorloc
