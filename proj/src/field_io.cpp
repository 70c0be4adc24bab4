#include "flatcore/field_io.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace flatcore::grid {

namespace {

constexpr char kMagic[4] = {'F', 'C', 'F', '1'};

template <class T>
void put(std::string& buf, T v) {
    char raw[sizeof(T)];
    std::memcpy(raw, &v, sizeof(T));
    buf.append(raw, sizeof(T));
}

template <class T>
T get(std::istream& in) {
    char raw[sizeof(T)];
    in.read(raw, sizeof(T));
    if (!in) throw Error("field read: truncated file");
    T v;
    std::memcpy(&v, raw, sizeof(T));
    return v;
}

void write_binary_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

} // namespace

void write_text_atomic(const std::string& path, const std::string& content) {
    write_binary_atomic(path, content);
}

void write_field_binary(const std::string& path, const Grid& g, const Field& u) {
    std::string buf;
    buf.append(kMagic, 4);
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(g.dim()));
    for (int d = 0; d < g.dim(); ++d)
        put<std::uint64_t>(buf, static_cast<std::uint64_t>(g.shape()[d]));
    put<double>(buf, g.h());
    for (int d = 0; d < g.dim(); ++d) put<double>(buf, g.origin()[d]);

    // Run-length encode the interior mask in linear cell order.
    std::vector<std::pair<std::uint64_t, std::uint64_t>> runs;
    const std::int64_t total = g.cell_count();
    for (std::int64_t i = 0; i < total;) {
        if (!g.is_interior(i)) {
            ++i;
            continue;
        }
        std::int64_t j = i;
        while (j < total && g.is_interior(j)) ++j;
        runs.emplace_back(static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j - i));
        i = j;
    }
    put<std::uint64_t>(buf, runs.size());
    for (const auto& [start, len] : runs) {
        put<std::uint64_t>(buf, start);
        put<std::uint64_t>(buf, len);
    }
    for (const auto& [start, len] : runs)
        for (std::uint64_t k = 0; k < len; ++k)
            put<double>(buf, u[static_cast<std::int64_t>(start + k)]);

    write_binary_atomic(path, buf);
}

LoadedField read_field_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw Error("field read: bad magic in " + path);

    LoadedField f;
    f.dim = static_cast<int>(get<std::uint32_t>(in));
    if (f.dim < 1 || f.dim > kMaxDim) throw Error("field read: bad dim");
    f.shape.fill(1);
    std::int64_t total = 1;
    for (int d = 0; d < f.dim; ++d) {
        f.shape[d] = static_cast<std::int64_t>(get<std::uint64_t>(in));
        total *= f.shape[d];
    }
    f.h = get<double>(in);
    for (int d = 0; d < f.dim; ++d) f.origin[d] = get<double>(in);

    const auto run_count = get<std::uint64_t>(in);
    std::vector<std::pair<std::uint64_t, std::uint64_t>> runs(run_count);
    for (auto& [start, len] : runs) {
        start = get<std::uint64_t>(in);
        len = get<std::uint64_t>(in);
        if (start + len > static_cast<std::uint64_t>(total))
            throw Error("field read: run out of range");
    }
    f.mask.assign(static_cast<size_t>(total), 0);
    f.values.assign(static_cast<size_t>(total), 0.0);
    for (const auto& [start, len] : runs)
        for (std::uint64_t k = 0; k < len; ++k) {
            f.mask[static_cast<size_t>(start + k)] = 1;
            f.values[static_cast<size_t>(start + k)] = get<double>(in);
        }
    return f;
}

void write_field_csv(const std::string& path, const Grid& g, const Field& u) {
    std::ostringstream out;
    out.precision(17);
    for (int d = 0; d < g.dim(); ++d) out << "x" << d << ",";
    out << "value\n";
    for (const std::int64_t i : g.interior_cells()) {
        const Point x = g.cell_center(i);
        for (int d = 0; d < g.dim(); ++d) out << x[d] << ",";
        out << u[i] << "\n";
    }
    write_text_atomic(path, out.str());
}

} // namespace flatcore::grid
