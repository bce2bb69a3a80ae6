#include "driftcast/cnn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "driftcast/csv.hpp"
#include "driftcast/rng.hpp"

namespace driftcast {

const std::array<ShapeFamily, 6> kShapeFamilies = {
    ShapeFamily::Ellipse,   ShapeFamily::HalfCircle, ShapeFamily::Rhombus,
    ShapeFamily::Rectangle, ShapeFamily::Square,     ShapeFamily::Triangle};

const char* shape_family_name(ShapeFamily f) {
  switch (f) {
    case ShapeFamily::Ellipse: return "ellipse";
    case ShapeFamily::HalfCircle: return "half-circle";
    case ShapeFamily::Rhombus: return "rhombus";
    case ShapeFamily::Rectangle: return "rectangle";
    case ShapeFamily::Square: return "square";
    case ShapeFamily::Triangle: return "triangle";
  }
  return "?";
}

namespace {

bool inside_shape(ShapeFamily f, double x, double y, double a) {
  const double b = 0.6 * a;
  switch (f) {
    case ShapeFamily::Ellipse:
      return (x * x) / (a * a) + (y * y) / (b * b) <= 1.0;
    case ShapeFamily::HalfCircle:
      return x * x + y * y <= a * a && x <= 0.0;
    case ShapeFamily::Rhombus:
      return std::abs(x) / a + std::abs(y) / b <= 1.0;
    case ShapeFamily::Rectangle:
      return std::abs(x) <= a && std::abs(y) <= b;
    case ShapeFamily::Square:
      return std::abs(x) <= a && std::abs(y) <= a;
    case ShapeFamily::Triangle:
      return x >= -a && x <= a && std::abs(y) <= b * (a - x) / (2.0 * a);
  }
  return false;
}

void proxy_label(GeometryImage& img) {
  const std::size_t h = img.pixels.rows, w = img.pixels.cols;
  // extents of the silhouette: flow runs along +x (columns)
  std::size_t min_r = h, max_r = 0, min_c = w, max_c = 0;
  bool any = false;
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c)
      if (img.pixels.at(r, c) > 0.5) {
        any = true;
        min_r = std::min(min_r, r);
        max_r = std::max(max_r, r);
        min_c = std::min(min_c, c);
        max_c = std::max(max_c, c);
      }
  if (!any) throw std::invalid_argument("degenerate shape: empty silhouette");
  const double cross_flow = static_cast<double>(max_r - min_r + 1);
  const double along_flow = static_cast<double>(max_c - min_c + 1);
  const double char_len = std::max(cross_flow, along_flow);
  img.cd = 1.5 * cross_flow / char_len;

  // weighted least-squares slope of the per-column midline
  double sw = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t c = 0; c < w; ++c) {
    double count = 0.0, ysum = 0.0;
    for (std::size_t r = 0; r < h; ++r)
      if (img.pixels.at(r, c) > 0.5) {
        count += 1.0;
        ysum += static_cast<double>(r);
      }
    if (count == 0.0) continue;
    const double mid = ysum / count;
    const double xc = static_cast<double>(c);
    sw += count;
    sx += count * xc;
    sy += count * mid;
    sxx += count * xc * xc;
    sxy += count * xc * mid;
  }
  const double denom = sw * sxx - sx * sx;
  img.cl = (std::abs(denom) > 1e-12) ? 1.0 * (sw * sxy - sx * sy) / denom : 0.0;
  if (std::abs(img.cl) < 1e-12) img.cl = 0.0;
  img.labeled = true;
}

}  // namespace

GeometryImage synth_geometry(ShapeFamily family, double scale, double angle, std::size_t size) {
  if (size < 8) throw std::invalid_argument("image size too small");
  if (scale <= 0.05 || scale > 1.0)
    throw std::invalid_argument("degenerate scale (expected in (0.05, 1])");
  GeometryImage img;
  img.name = std::string(shape_family_name(family)) + "_s" + format_g17(scale) + "_a" +
             format_g17(angle);
  img.pixels = Mat(size, size);
  const double half = static_cast<double>(size) / 2.0;
  const double a = scale * (half - 1.0);
  const double ca = std::cos(angle), sa = std::sin(angle);
  for (std::size_t r = 0; r < size; ++r) {
    for (std::size_t c = 0; c < size; ++c) {
      // rotate the pixel back into the shape frame
      const double px = static_cast<double>(c) + 0.5 - half;
      const double py = static_cast<double>(r) + 0.5 - half;
      const double x = ca * px + sa * py;
      const double y = -sa * px + ca * py;
      img.pixels.at(r, c) = inside_shape(family, x, y, a) ? 1.0 : 0.0;
    }
  }
  proxy_label(img);
  return img;
}

std::vector<GeometryImage> default_corpus(std::size_t size) {
  // 6 families x 5 scales x 6 angles = 180, minus the final combination = 179.
  const std::array<double, 5> scales = {0.35, 0.5, 0.65, 0.8, 0.95};
  const std::array<double, 6> angles = {0.0, 0.3, 0.6, 0.9, 1.2, 1.5};
  std::vector<GeometryImage> corpus;
  corpus.reserve(179);
  for (ShapeFamily f : kShapeFamilies)
    for (double s : scales)
      for (double ang : angles) {
        if (corpus.size() == 179) break;
        corpus.push_back(synth_geometry(f, s, ang, size));
      }
  return corpus;
}

// ------------------------------------------------------------------ conv ops

TensorPtr conv2d_valid(const TensorPtr& x, std::size_t h, std::size_t w_px, const TensorPtr& w,
                       std::size_t kernel, const TensorPtr& bias) {
  const std::size_t c_in = x->rows();
  if (x->cols() != h * w_px) throw std::invalid_argument("conv2d: input geometry mismatch");
  if (kernel == 0 || h < kernel || w_px < kernel)
    throw std::invalid_argument("conv2d: kernel larger than input");
  const std::size_t c_out = w->rows();
  if (w->cols() != c_in * kernel * kernel)
    throw std::invalid_argument("conv2d: weight shape mismatch");
  if (bias->cols() != c_out) throw std::invalid_argument("conv2d: bias shape mismatch");
  const std::size_t ho = h - kernel + 1, wo = w_px - kernel + 1;

  auto out = std::make_shared<Tensor>();
  out->shape = {c_out, ho * wo};
  out->data.assign(c_out * ho * wo, 0.0);
  out->parents = {x, w, bias};
  for (std::size_t co = 0; co < c_out; ++co) {
    const double* wrow = w->data.data() + co * c_in * kernel * kernel;
    for (std::size_t r = 0; r < ho; ++r)
      for (std::size_t c = 0; c < wo; ++c) {
        double acc = bias->data[co];
        for (std::size_t ci = 0; ci < c_in; ++ci) {
          const double* plane = x->data.data() + ci * h * w_px;
          const double* wk = wrow + ci * kernel * kernel;
          for (std::size_t kr = 0; kr < kernel; ++kr) {
            const double* src = plane + (r + kr) * w_px + c;
            const double* wr = wk + kr * kernel;
            for (std::size_t kc = 0; kc < kernel; ++kc) acc += src[kc] * wr[kc];
          }
        }
        out->data[co * ho * wo + r * wo + c] = acc;
      }
  }
  Tensor* o = out.get();
  Tensor* px = x.get();
  Tensor* pw = w.get();
  Tensor* pb = bias.get();
  out->backward_fn = [o, px, pw, pb, h, w_px, kernel, c_in, c_out, ho, wo]() {
    px->ensure_grad();
    pw->ensure_grad();
    pb->ensure_grad();
    for (std::size_t co = 0; co < c_out; ++co) {
      const double* wrow = pw->data.data() + co * c_in * kernel * kernel;
      double* gwrow = pw->grad.data() + co * c_in * kernel * kernel;
      for (std::size_t r = 0; r < ho; ++r)
        for (std::size_t c = 0; c < wo; ++c) {
          const double go = o->grad[co * ho * wo + r * wo + c];
          if (go == 0.0) continue;
          pb->grad[co] += go;
          for (std::size_t ci = 0; ci < c_in; ++ci) {
            const double* plane = px->data.data() + ci * h * w_px;
            double* gplane = px->grad.data() + ci * h * w_px;
            const double* wk = wrow + ci * kernel * kernel;
            double* gwk = gwrow + ci * kernel * kernel;
            for (std::size_t kr = 0; kr < kernel; ++kr)
              for (std::size_t kc = 0; kc < kernel; ++kc) {
                const std::size_t idx = (r + kr) * w_px + c + kc;
                gwk[kr * kernel + kc] += plane[idx] * go;
                gplane[idx] += wk[kr * kernel + kc] * go;
              }
          }
        }
    }
  };
  return out;
}

TensorPtr maxpool2x2(const TensorPtr& x, std::size_t h, std::size_t w_px) {
  const std::size_t c = x->rows();
  if (x->cols() != h * w_px) throw std::invalid_argument("maxpool: input geometry mismatch");
  const std::size_t ho = h / 2, wo = w_px / 2;
  if (ho == 0 || wo == 0) throw std::invalid_argument("maxpool: input too small");

  auto out = std::make_shared<Tensor>();
  out->shape = {c, ho * wo};
  out->data.assign(c * ho * wo, 0.0);
  out->parents = {x};
  auto argmax = std::make_shared<std::vector<std::size_t>>(c * ho * wo);
  for (std::size_t ci = 0; ci < c; ++ci) {
    const double* plane = x->data.data() + ci * h * w_px;
    for (std::size_t r = 0; r < ho; ++r)
      for (std::size_t cc = 0; cc < wo; ++cc) {
        std::size_t best = (2 * r) * w_px + 2 * cc;
        for (std::size_t dr = 0; dr < 2; ++dr)
          for (std::size_t dc = 0; dc < 2; ++dc) {
            const std::size_t idx = (2 * r + dr) * w_px + 2 * cc + dc;
            if (plane[idx] > plane[best]) best = idx;
          }
        out->data[ci * ho * wo + r * wo + cc] = plane[best];
        (*argmax)[ci * ho * wo + r * wo + cc] = ci * h * w_px + best;
      }
  }
  Tensor* o = out.get();
  Tensor* px = x.get();
  out->backward_fn = [o, px, argmax]() {
    px->ensure_grad();
    for (std::size_t i = 0; i < o->size(); ++i) px->grad[(*argmax)[i]] += o->grad[i];
  };
  return out;
}

namespace {

// shape passthrough: same data viewed as 1 x n
TensorPtr flatten(const TensorPtr& x) {
  auto out = std::make_shared<Tensor>();
  out->shape = {1, x->size()};
  out->data = x->data;
  out->parents = {x};
  Tensor* o = out.get();
  Tensor* px = x.get();
  out->backward_fn = [o, px]() {
    px->ensure_grad();
    for (std::size_t i = 0; i < o->size(); ++i) px->grad[i] += o->grad[i];
  };
  return out;
}

}  // namespace

// --------------------------------------------------------------------- model

CnnModel::CnnModel(const CnnConfig& cfg) : cfg_(cfg) {
  if (cfg.channels.size() != cfg.kernels.size())
    throw std::invalid_argument("cnn: channels/kernels length mismatch");
  if (cfg.channels.empty()) throw std::invalid_argument("cnn: need at least one conv layer");
  Rng rng(cfg.seed);
  std::size_t c_in = 1, h = cfg.image_size;
  for (std::size_t l = 0; l < cfg.channels.size(); ++l) {
    const std::size_t k = cfg.kernels[l], c_out = cfg.channels[l];
    if (h < k) throw std::invalid_argument("cnn: image too small for conv stack");
    auto w = glorot(c_out, c_in * k * k, rng);
    auto b = make_tensor({1, c_out});
    conv_w_.push_back(w);
    conv_b_.push_back(b);
    params_.push_back(w);
    params_.push_back(b);
    h = (h - k + 1) / 2;  // conv (valid) then 2x2 pool
    if (h == 0) throw std::invalid_argument("cnn: image too small for conv stack");
    c_in = c_out;
  }
  flatten_len_ = c_in * h * h;
  dense_w_ = glorot(flatten_len_, cfg.dense_units, rng);
  dense_b_ = make_tensor({1, cfg.dense_units});
  out_w_ = glorot(cfg.dense_units, 2, rng);
  out_b_ = make_tensor({1, 2});
  params_.push_back(dense_w_);
  params_.push_back(dense_b_);
  params_.push_back(out_w_);
  params_.push_back(out_b_);
}

std::vector<std::string> CnnModel::param_names() const {
  std::vector<std::string> names;
  for (std::size_t l = 0; l < conv_w_.size(); ++l) {
    names.push_back("conv" + std::to_string(l) + ".w");
    names.push_back("conv" + std::to_string(l) + ".b");
  }
  names.push_back("dense.w");
  names.push_back("dense.b");
  names.push_back("out.w");
  names.push_back("out.b");
  return names;
}

TensorPtr CnnModel::forward(const GeometryImage& image) const {
  if (image.pixels.rows != cfg_.image_size || image.pixels.cols != cfg_.image_size)
    throw std::invalid_argument("cnn: image size mismatch");
  auto x = make_tensor({1, cfg_.image_size * cfg_.image_size},
                       std::vector<double>(image.pixels.v.begin(), image.pixels.v.end()));
  std::size_t h = cfg_.image_size;
  for (std::size_t l = 0; l < conv_w_.size(); ++l) {
    const std::size_t k = cfg_.kernels[l];
    x = relu(conv2d_valid(x, h, h, conv_w_[l], k, conv_b_[l]));
    h = h - k + 1;
    x = maxpool2x2(x, h, h);
    h /= 2;
  }
  auto flat = flatten(x);
  auto hidden = relu(add_rowvec(matmul(flat, dense_w_), dense_b_));
  return add_rowvec(matmul(hidden, out_w_), out_b_);
}

TensorPtr CnnModel::batch_loss(const std::vector<const GeometryImage*>& batch) const {
  std::vector<TensorPtr> outputs;
  std::vector<double> target;
  outputs.reserve(batch.size());
  for (const auto* img : batch) {
    if (!img->labeled) throw std::invalid_argument("cnn: training image has no label");
    outputs.push_back(forward(*img));
    target.push_back(img->cd);
    target.push_back(img->cl);
  }
  return mse_loss(outputs.size() == 1 ? outputs[0] : concat_rows(outputs), target);
}

TrainHistory CnnModel::train(const std::vector<GeometryImage>& images, const TrainConfig& cfg) {
  if (images.empty()) throw std::invalid_argument("cnn: empty training set");
  auto loss_fn = [this, &images](const std::vector<std::size_t>& idx, bool) {
    std::vector<const GeometryImage*> batch;
    batch.reserve(idx.size());
    for (std::size_t i : idx) batch.push_back(&images[i]);
    return batch_loss(batch);
  };
  auto hist = run_training(images.size(), cfg, params_, loss_fn);
  trained_ = true;
  return hist;
}

std::array<double, 2> CnnModel::predict(const GeometryImage& image) const {
  auto out = forward(image);
  return {out->data[0], out->data[1]};
}

std::array<double, 2> CnnModel::predict_coeffs(const GeometryImage& image) const {
  if (!trained_) throw std::logic_error("cnn: predict before training");
  auto raw = predict(image);
  return {std::max(0.0, raw[0]), std::max(0.0, raw[1])};
}

// ----------------------------------------------------------------------- I/O

void write_pgm(const GeometryImage& image, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write pgm: " + path);
  out << "P5\n" << image.pixels.cols << " " << image.pixels.rows << "\n255\n";
  for (double v : image.pixels.v) {
    const unsigned char byte =
        static_cast<unsigned char>(std::clamp(v, 0.0, 1.0) * 255.0 + 0.5);
    out.put(static_cast<char>(byte));
  }
}

GeometryImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open pgm: " + path);
  std::string magic;
  std::size_t w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P5" || w == 0 || h == 0 || maxval == 0 || maxval > 255)
    throw std::runtime_error("unsupported pgm header in " + path);
  in.get();  // single whitespace after maxval
  GeometryImage img;
  img.name = path;
  img.pixels = Mat(h, w);
  std::vector<char> raw(w * h);
  in.read(raw.data(), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size()))
    throw std::runtime_error("truncated pgm: " + path);
  for (std::size_t i = 0; i < raw.size(); ++i)
    img.pixels.v[i] = static_cast<unsigned char>(raw[i]) / static_cast<double>(maxval);
  return img;
}

void save_labels_csv(const std::vector<GeometryImage>& images, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write labels csv: " + path);
  out << "file,C_D,C_L\n";
  for (const auto& img : images)
    out << img.name << ".pgm," << format_g17(img.cd) << ',' << format_g17(img.cl) << "\n";
}

std::vector<GeometryImage> load_labeled_corpus(const std::string& dir, const std::string& csv) {
  std::ifstream in(csv);
  if (!in) throw std::runtime_error("cannot open labels csv: " + csv);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty labels csv: " + csv);
  std::vector<GeometryImage> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != 3) throw std::runtime_error("bad labels row: " + line);
    GeometryImage img = read_pgm(dir + "/" + cells[0]);
    img.name = cells[0];
    img.cd = parse_double(cells[1]);
    img.cl = parse_double(cells[2]);
    img.labeled = true;
    out.push_back(std::move(img));
  }
  return out;
}

}  // namespace driftcast
