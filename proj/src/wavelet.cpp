#include "respan/wavelet.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace respan {

namespace {

ImageTensor crop(const ImageTensor& img, int h, int w) {
    if (img.height() == h && img.width() == w) return img;
    ImageTensor out(img.bands(), h, w);
    for (int c = 0; c < img.bands(); ++c) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) out.at(c, y, x) = img.at(c, y, x);
        }
    }
    return out;
}

// Replicate the last row/column when a dimension is odd.
ImageTensor pad_to_even(const ImageTensor& img) {
    const int h = img.height() + (img.height() % 2);
    const int w = img.width() + (img.width() % 2);
    if (h == img.height() && w == img.width()) return img;
    ImageTensor out(img.bands(), h, w);
    for (int c = 0; c < img.bands(); ++c) {
        for (int y = 0; y < h; ++y) {
            const int sy = std::min(y, img.height() - 1);
            for (int x = 0; x < w; ++x) {
                out.at(c, y, x) = img.at(c, sy, std::min(x, img.width() - 1));
            }
        }
    }
    return out;
}

} // namespace

WaveletQuad db1_decompose(const ImageTensor& img) {
    if (img.size() == 0) throw std::invalid_argument("db1_decompose: empty image");
    const ImageTensor src = pad_to_even(img);
    const int hh2 = src.height() / 2;
    const int ww2 = src.width() / 2;
    WaveletQuad q{ImageTensor(src.bands(), hh2, ww2), ImageTensor(src.bands(), hh2, ww2),
                  ImageTensor(src.bands(), hh2, ww2), ImageTensor(src.bands(), hh2, ww2)};
    for (int c = 0; c < src.bands(); ++c) {
        for (int y = 0; y < hh2; ++y) {
            for (int x = 0; x < ww2; ++x) {
                const double a = src.at(c, 2 * y, 2 * x);
                const double b = src.at(c, 2 * y, 2 * x + 1);
                const double d = src.at(c, 2 * y + 1, 2 * x);
                const double e = src.at(c, 2 * y + 1, 2 * x + 1);
                q.ll.at(c, y, x) = (a + b + d + e) / 2.0;
                q.lh.at(c, y, x) = (a + b - d - e) / 2.0;
                q.hl.at(c, y, x) = (a - b + d - e) / 2.0;
                q.hh.at(c, y, x) = (a - b - d + e) / 2.0;
            }
        }
    }
    return q;
}

ImageTensor db1_reconstruct(const WaveletQuad& quad, int out_height, int out_width) {
    check_same_shape(quad.ll, quad.lh, "db1_reconstruct");
    check_same_shape(quad.ll, quad.hl, "db1_reconstruct");
    check_same_shape(quad.ll, quad.hh, "db1_reconstruct");
    const int full_h = quad.ll.height() * 2;
    const int full_w = quad.ll.width() * 2;
    if (out_height > full_h || out_width > full_w || out_height < full_h - 1 ||
        out_width < full_w - 1) {
        throw std::invalid_argument("db1_reconstruct: output " + std::to_string(out_height) + "x" +
                                    std::to_string(out_width) + " incompatible with quad " +
                                    std::to_string(full_h) + "x" + std::to_string(full_w));
    }
    ImageTensor out(quad.ll.bands(), out_height, out_width);
    for (int c = 0; c < out.bands(); ++c) {
        for (int y = 0; y < quad.ll.height(); ++y) {
            for (int x = 0; x < quad.ll.width(); ++x) {
                const double ll = quad.ll.at(c, y, x);
                const double lh = quad.lh.at(c, y, x);
                const double hl = quad.hl.at(c, y, x);
                const double hh = quad.hh.at(c, y, x);
                const double a = (ll + lh + hl + hh) / 2.0;
                const double b = (ll + lh - hl - hh) / 2.0;
                const double d = (ll - lh + hl - hh) / 2.0;
                const double e = (ll - lh - hl + hh) / 2.0;
                if (2 * y < out_height && 2 * x < out_width) out.at(c, 2 * y, 2 * x) = a;
                if (2 * y < out_height && 2 * x + 1 < out_width) out.at(c, 2 * y, 2 * x + 1) = b;
                if (2 * y + 1 < out_height && 2 * x < out_width) out.at(c, 2 * y + 1, 2 * x) = d;
                if (2 * y + 1 < out_height && 2 * x + 1 < out_width)
                    out.at(c, 2 * y + 1, 2 * x + 1) = e;
            }
        }
    }
    return out;
}

ConditionSet build_condition(const ImageTensor& lrms, const ImageTensor& pan) {
    if (pan.bands() != 1) throw std::invalid_argument("build_condition: PAN must be 1-band");
    if (pan.height() != lrms.height() || pan.width() != lrms.width()) {
        throw std::invalid_argument("build_condition: PAN and LRMS spatial sizes differ");
    }

    ConditionSet cond;
    cond.pan = pan;
    cond.lrms = lrms;
    cond.lrms_quad = db1_decompose(lrms);
    cond.pan_quad = db1_decompose(pan);

    const int c_bands = lrms.bands();
    const int total = 1 + c_bands + 4 * (c_bands + 1);
    ImageTensor stacked(total, lrms.height(), lrms.width());

    int ch = 0;
    const auto copy_into = [&](const ImageTensor& src) {
        for (int c = 0; c < src.bands(); ++c) {
            auto dst = stacked.band(ch++);
            auto s = src.band(c);
            std::copy(s.begin(), s.end(), dst.begin());
        }
    };
    copy_into(pan);
    copy_into(lrms);
    for (const auto* comp : {&cond.lrms_quad.ll, &cond.lrms_quad.lh, &cond.lrms_quad.hl,
                             &cond.lrms_quad.hh}) {
        copy_into(crop(upsample_nearest(*comp, 2), lrms.height(), lrms.width()));
    }
    for (const auto* comp : {&cond.pan_quad.ll, &cond.pan_quad.lh, &cond.pan_quad.hl,
                             &cond.pan_quad.hh}) {
        copy_into(crop(upsample_nearest(*comp, 2), lrms.height(), lrms.width()));
    }
    cond.stacked = std::move(stacked);
    return cond;
}

} // namespace respan
