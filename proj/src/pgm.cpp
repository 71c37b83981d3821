#include "proxrate/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>

namespace proxrate {

namespace {

class PgmParser {
 public:
  PgmParser(std::string data, std::string path)
      : data_(std::move(data)), path_(std::move(path)) {}

  Image parse() {
    if (data_.size() < 2 || data_[0] != 'P' ||
        (data_[1] != '2' && data_[1] != '5'))
      fail(0, "not a P2/P5 PGM file");
    const bool binary = data_[1] == '5';
    pos_ = 2;
    const long width = next_header_int("width");
    const long height = next_header_int("height");
    const long maxval = next_header_int("maxval");
    if (width < 1 || height < 1)
      fail(pos_, "invalid image dimensions " + std::to_string(width) + "x" +
                     std::to_string(height));
    if (maxval < 1 || maxval > 65535)
      fail(pos_, "maxval " + std::to_string(maxval) +
                     " out of range [1, 65535]");

    Image img;
    img.width = static_cast<int>(width);
    img.height = static_cast<int>(height);
    const std::size_t count =
        static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    img.pixels.resize(static_cast<Eigen::Index>(count));

    if (binary) {
      // Exactly one whitespace byte separates the header from the payload.
      if (pos_ >= data_.size() || !is_space(data_[pos_]))
        fail(pos_, "expected single whitespace before binary payload");
      ++pos_;
      const int bytes_per_sample = maxval > 255 ? 2 : 1;
      for (std::size_t i = 0; i < count; ++i) {
        if (pos_ + static_cast<std::size_t>(bytes_per_sample) > data_.size())
          fail(pos_, "truncated payload: sample " + std::to_string(i) +
                         " of " + std::to_string(count));
        long v;
        if (bytes_per_sample == 1) {
          v = static_cast<unsigned char>(data_[pos_]);
        } else {
          v = 256L * static_cast<unsigned char>(data_[pos_]) +
              static_cast<unsigned char>(data_[pos_ + 1]);
        }
        if (v > maxval)
          fail(pos_, "sample value " + std::to_string(v) + " exceeds maxval " +
                         std::to_string(maxval));
        img.pixels[static_cast<Eigen::Index>(i)] =
            static_cast<double>(v) / static_cast<double>(maxval);
        pos_ += static_cast<std::size_t>(bytes_per_sample);
      }
      while (pos_ < data_.size() && is_space(data_[pos_])) ++pos_;
      if (pos_ != data_.size()) fail(pos_, "trailing data after payload");
    } else {
      for (std::size_t i = 0; i < count; ++i) {
        const long v = next_header_int("sample " + std::to_string(i));
        if (v > maxval)
          fail(last_token_pos_, "sample value " + std::to_string(v) +
                                    " exceeds maxval " +
                                    std::to_string(maxval));
        img.pixels[static_cast<Eigen::Index>(i)] =
            static_cast<double>(v) / static_cast<double>(maxval);
      }
      skip_space_and_comments();
      if (pos_ != data_.size()) fail(pos_, "trailing data after payload");
    }
    return img;
  }

 private:
  static bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
           c == '\v';
  }

  [[noreturn]] void fail(std::size_t offset, const std::string& what) {
    throw FormatError(path_ + ": " + what + " at byte offset " +
                      std::to_string(offset));
  }

  void skip_space_and_comments() {
    while (pos_ < data_.size()) {
      if (is_space(data_[pos_])) {
        ++pos_;
      } else if (data_[pos_] == '#') {
        while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  long next_header_int(const std::string& what) {
    skip_space_and_comments();
    if (pos_ >= data_.size()) fail(pos_, "missing " + what);
    last_token_pos_ = pos_;
    if (!std::isdigit(static_cast<unsigned char>(data_[pos_])))
      fail(pos_, "expected unsigned integer for " + what);
    long v = 0;
    while (pos_ < data_.size() &&
           std::isdigit(static_cast<unsigned char>(data_[pos_]))) {
      v = v * 10 + (data_[pos_] - '0');
      if (v > 1000000000L) fail(last_token_pos_, what + " is absurdly large");
      ++pos_;
    }
    return v;
  }

  std::string data_;
  std::string path_;
  std::size_t pos_ = 0;
  std::size_t last_token_pos_ = 0;
};

}  // namespace

Image load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return PgmParser(std::move(data), path).parse();
}

void save_pgm(const Image& img, const std::string& path) {
  if (img.height < 1 || img.width < 1 ||
      img.pixels.size() !=
          static_cast<Eigen::Index>(img.height) * img.width)
    throw ParameterError("save_pgm: inconsistent image shape");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  std::string payload;
  payload.reserve(static_cast<std::size_t>(img.pixels.size()));
  for (Eigen::Index i = 0; i < img.pixels.size(); ++i) {
    const double v = std::clamp(img.pixels[i], 0.0, 1.0) * 255.0;
    payload.push_back(
        static_cast<char>(static_cast<unsigned char>(std::llround(v))));
  }
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  out.flush();
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace proxrate
