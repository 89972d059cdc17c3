#pragma once

#include "respan/tensor.hpp"

namespace respan {

// One-level Haar split, orthonormal divisor-2 convention. For each 2x2 block
// (a b / c d):
//   ll = (a+b+c+d)/2   lh = (a+b-c-d)/2
//   hl = (a-b+c-d)/2   hh = (a-b-c+d)/2
// The block transform matrix (1/2)*[[1,1,1,1],[1,1,-1,-1],[1,-1,1,-1],[1,-1,-1,1]]
// is orthogonal and symmetric, so it is its own inverse and preserves energy.
// A constant image v maps to ll = 2v with zero detail.
struct WaveletQuad {
    ImageTensor ll, lh, hl, hh;  // each C x H/2 x W/2
};

// Odd inputs are replicate-padded by one row/column before the split.
WaveletQuad db1_decompose(const ImageTensor& img);

// Inverse split, cropped to out_height x out_width (undoes odd-size padding).
ImageTensor db1_reconstruct(const WaveletQuad& quad, int out_height, int out_width);

// Predictor conditioning: PAN, pre-upsampled LRMS, and the Haar components of
// both, nearest-upsampled back to H x W. Stacked channel layout:
//   [ pan | lrms (C) | lrms LL,LH,HL,HH (4C) | pan LL,LH,HL,HH (4) ]
// for a total of 1 + C + 4*(C+1) channels.
struct ConditionSet {
    ImageTensor pan;       // 1 x H x W
    ImageTensor lrms;      // C x H x W
    WaveletQuad lrms_quad; // half resolution
    WaveletQuad pan_quad;  // half resolution
    ImageTensor stacked;   // (1 + C + 4(C+1)) x H x W

    int channels() const { return stacked.bands(); }
};

ConditionSet build_condition(const ImageTensor& lrms, const ImageTensor& pan);

} // namespace respan
