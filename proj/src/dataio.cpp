#include "lsmvos/dataio.hpp"

#include "lsmvos/error.hpp"

#include <png.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <memory>
#include <set>

#ifdef LSMVOS_WITH_JPEG
#include <csetjmp>
#include <jpeglib.h>
#endif

namespace lsmvos {

namespace {

IoError io_error(const fs::path& path, const std::string& why) { return IoError(path.string() + ": " + why); }

std::string lower_ext(const fs::path& p) {
    std::string e = p.extension().string();
    std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return e;
}

bool is_frame_file(const fs::path& p) {
    const std::string e = lower_ext(p);
    return e == ".jpg" || e == ".jpeg" || e == ".png" || e == ".ppm";
}

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const fs::path& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw io_error(path, mode[0] == 'r' ? "cannot open for reading" : "cannot open for writing");
    return f;
}

// ---- PPM ----

struct PpmHeader {
    std::size_t width = 0, height = 0;
    std::streamoff data_offset = 0;
};

PpmHeader read_ppm_header(std::istream& in, const fs::path& path) {
    auto token = [&]() {
        std::string t;
        char c;
        while (in.get(c)) {
            if (c == '#') {
                std::string skip;
                std::getline(in, skip);
                continue;
            }
            if (std::isspace(static_cast<unsigned char>(c))) {
                if (!t.empty()) break;
                continue;
            }
            t.push_back(c);
        }
        return t;
    };
    if (token() != "P6") throw io_error(path, "not a binary PPM (P6) file");
    PpmHeader h;
    try {
        h.width = std::stoul(token());
        h.height = std::stoul(token());
        if (std::stoul(token()) != 255) throw io_error(path, "only maxval 255 PPM files are supported");
    } catch (const std::logic_error&) {
        throw io_error(path, "malformed PPM header");
    }
    h.data_offset = in.tellg();
    return h;
}

Image read_ppm(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error(path, "cannot open for reading");
    const PpmHeader h = read_ppm_header(in, path);
    Image img(h.width, h.height);
    in.read(reinterpret_cast<char*>(img.rgb.data()), static_cast<std::streamsize>(img.rgb.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.rgb.size())) throw io_error(path, "truncated PPM data");
    return img;
}

// ---- PNG (frames) ----

Image read_png_rgb(const fs::path& path) {
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&png, path.c_str())) throw io_error(path, png.message);
    png.format = PNG_FORMAT_RGB;
    Image img(png.width, png.height);
    if (!png_image_finish_read(&png, nullptr, img.rgb.data(), 0, nullptr)) {
        const std::string msg = png.message;
        png_image_free(&png);
        throw io_error(path, msg);
    }
    return img;
}

#ifdef LSMVOS_WITH_JPEG
struct JpegError {
    jpeg_error_mgr mgr;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_fail(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegError*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

Image read_jpeg(const fs::path& path, bool header_only) {
    FilePtr f = open_file(path, "rb");
    jpeg_decompress_struct cinfo{};
    JpegError err{};
    cinfo.err = jpeg_std_error(&err.mgr);
    err.mgr.error_exit = jpeg_fail;
    Image img;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw io_error(path, err.message);
    }
    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, f.get());
    jpeg_read_header(&cinfo, TRUE);
    if (header_only) {
        img.width = cinfo.image_width;
        img.height = cinfo.image_height;
        jpeg_destroy_decompress(&cinfo);
        return img;
    }
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    img = Image(cinfo.output_width, cinfo.output_height);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = img.rgb.data() + static_cast<std::size_t>(cinfo.output_scanline) * img.width * 3;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return img;
}
#endif

[[noreturn]] void png_throw(png_structp png, png_const_charp msg) {
    throw IoError(*static_cast<const std::string*>(png_get_error_ptr(png)) + ": " + msg);
}

void png_warn(png_structp, png_const_charp) {}

} // namespace

bool jpeg_supported() noexcept {
#ifdef LSMVOS_WITH_JPEG
    return true;
#else
    return false;
#endif
}

Image read_image(const fs::path& path) {
    const std::string e = lower_ext(path);
    if (e == ".ppm") return read_ppm(path);
    if (e == ".png") return read_png_rgb(path);
    if (e == ".jpg" || e == ".jpeg") {
#ifdef LSMVOS_WITH_JPEG
        return read_jpeg(path, false);
#else
        throw io_error(path, "JPEG support not compiled in; convert frames to PNG first");
#endif
    }
    throw io_error(path, "unsupported image format '" + e + "'");
}

std::array<std::size_t, 2> image_extent(const fs::path& path) {
    const std::string e = lower_ext(path);
    if (e == ".ppm") {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw io_error(path, "cannot open for reading");
        const PpmHeader h = read_ppm_header(in, path);
        return {h.width, h.height};
    }
    if (e == ".png") {
        png_image png{};
        png.version = PNG_IMAGE_VERSION;
        if (!png_image_begin_read_from_file(&png, path.c_str())) throw io_error(path, png.message);
        std::array<std::size_t, 2> out{png.width, png.height};
        png_image_free(&png);
        return out;
    }
#ifdef LSMVOS_WITH_JPEG
    if (e == ".jpg" || e == ".jpeg") {
        const Image h = read_jpeg(path, true);
        return {h.width, h.height};
    }
#endif
    return [&] {
        const Image img = read_image(path);
        return std::array<std::size_t, 2>{img.width, img.height};
    }();
}

void write_png(const fs::path& path, const Image& image) {
    if (image.rgb.size() != image.width * image.height * 3) throw io_error(path, "image buffer does not match extents");
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(image.width);
    png.height = static_cast<png_uint_32>(image.height);
    png.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&png, path.c_str(), 0, image.rgb.data(), 0, nullptr))
        throw io_error(path, png.message);
}

void write_ppm(const fs::path& path, const Image& image) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error(path, "cannot open for writing");
    out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.rgb.data()), static_cast<std::streamsize>(image.rgb.size()));
    if (!out) throw io_error(path, "write failed");
}

const std::array<std::array<std::uint8_t, 3>, 256>& label_palette() {
    static const auto palette = [] {
        std::array<std::array<std::uint8_t, 3>, 256> p{};
        for (unsigned i = 0; i < 256; ++i) {
            unsigned id = i, r = 0, g = 0, b = 0;
            for (int shift = 7; shift >= 0; --shift) {
                r |= (id & 1u) << shift;
                g |= ((id >> 1) & 1u) << shift;
                b |= ((id >> 2) & 1u) << shift;
                id >>= 3;
            }
            p[i] = {static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b)};
        }
        return p;
    }();
    return palette;
}

LabelMap read_label_map(const fs::path& path) {
    FilePtr f = open_file(path, "rb");
    const std::string where = path.string();
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, const_cast<std::string*>(&where), png_throw,
                                             png_warn);
    if (!png) throw io_error(path, "libpng initialisation failed");
    png_infop info = png_create_info_struct(png);
    struct Guard {
        png_structp& png;
        png_infop& info;
        ~Guard() { png_destroy_read_struct(&png, &info, nullptr); }
    } guard{png, info};

    png_init_io(png, f.get());
    png_read_info(png, info);
    const auto width = png_get_image_width(png, info);
    const auto height = png_get_image_height(png, info);
    const int color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);
    if (color != PNG_COLOR_TYPE_PALETTE && color != PNG_COLOR_TYPE_GRAY)
        throw io_error(path, "label maps must be indexed-palette or grayscale PNGs");
    if (depth == 16) png_set_strip_16(png);
    if (depth < 8) png_set_packing(png);
    png_read_update_info(png, info);
    if (png_get_rowbytes(png, info) != width) throw io_error(path, "unexpected label map row layout");

    LabelMap labels(width, height);
    std::vector<png_bytep> rows(height);
    for (std::size_t y = 0; y < height; ++y) rows[y] = labels.labels.data() + y * width;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);

    if (color == PNG_COLOR_TYPE_GRAY) {
        const bool binary = std::all_of(labels.labels.begin(), labels.labels.end(),
                                        [](std::uint8_t v) { return v == 0 || v == 255; });
        if (binary)
            for (auto& v : labels.labels) v = v ? 1 : 0;
    }
    return labels;
}

void write_label_map(const fs::path& path, const LabelMap& labels) {
    if (labels.width == 0 || labels.height == 0 || labels.labels.size() != labels.width * labels.height)
        throw io_error(path, "label map buffer does not match extents");
    FilePtr f = open_file(path, "wb");
    const std::string where = path.string();
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, const_cast<std::string*>(&where), png_throw,
                                              png_warn);
    if (!png) throw io_error(path, "libpng initialisation failed");
    png_infop info = png_create_info_struct(png);
    struct Guard {
        png_structp& png;
        png_infop& info;
        ~Guard() { png_destroy_write_struct(&png, &info); }
    } guard{png, info};

    png_init_io(png, f.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(labels.width), static_cast<png_uint_32>(labels.height), 8,
                 PNG_COLOR_TYPE_PALETTE, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    std::array<png_color, 256> colors{};
    for (std::size_t i = 0; i < 256; ++i)
        colors[i] = {label_palette()[i][0], label_palette()[i][1], label_palette()[i][2]};
    png_set_PLTE(png, info, colors.data(), 256);
    png_write_info(png, info);
    for (std::size_t y = 0; y < labels.height; ++y)
        png_write_row(png, labels.labels.data() + y * labels.width);
    png_write_end(png, nullptr);
}

std::optional<fs::path> SequenceHandle::annotation_for(std::size_t index) const {
    if (index >= frames.size()) return std::nullopt;
    const auto stem = frames[index].stem();
    for (const auto& a : annotations)
        if (a.stem() == stem) return a;
    return std::nullopt;
}

SequenceHandle load_sequence(const fs::path& root, const std::string& set, const std::string& name) {
    const fs::path frame_dir = root / "JPEGImages" / set / name;
    const fs::path anno_dir = root / "Annotations" / set / name;
    if (!fs::is_directory(frame_dir)) throw io_error(frame_dir, "frame directory does not exist");
    if (!fs::is_directory(anno_dir)) throw io_error(anno_dir, "annotation directory does not exist");

    SequenceHandle seq;
    seq.name = name;
    for (const auto& e : fs::directory_iterator(frame_dir))
        if (e.is_regular_file() && is_frame_file(e.path())) seq.frames.push_back(e.path());
    for (const auto& e : fs::directory_iterator(anno_dir))
        if (e.is_regular_file() && lower_ext(e.path()) == ".png") seq.annotations.push_back(e.path());
    std::sort(seq.frames.begin(), seq.frames.end());
    std::sort(seq.annotations.begin(), seq.annotations.end());
    if (seq.frames.empty()) throw io_error(frame_dir, "no frames found");
    if (!seq.annotation_for(0))
        throw io_error(anno_dir, "missing annotation for first frame " + seq.frames[0].filename().string());

    const auto [w, h] = image_extent(seq.frames[0]);
    seq.width = w;
    seq.height = h;
    auto check = [&](const fs::path& p) {
        if (image_extent(p) != std::array<std::size_t, 2>{w, h})
            throw io_error(p, "resolution differs from first frame (" + std::to_string(w) + "x" + std::to_string(h) +
                                  ")");
    };
    for (const auto& p : seq.frames) check(p);
    for (const auto& p : seq.annotations) check(p);
    return seq;
}

} // namespace lsmvos
