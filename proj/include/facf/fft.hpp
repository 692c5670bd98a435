#pragma once

// DFT convention used throughout: forward transform is unnormalized,
// inverse transform carries the 1/(M*N) factor.

#include <opencv2/core.hpp>

#include "facf/grid.hpp"

namespace facf {

namespace detail {

inline cv::Mat view(RealGrid& g) { return cv::Mat(g.rows(), g.cols(), CV_64FC1, g.data()); }
inline cv::Mat view(ComplexGrid& g) { return cv::Mat(g.rows(), g.cols(), CV_64FC2, g.data()); }

} // namespace detail

inline ComplexGrid dft2(const RealGrid& x)
{
    RealGrid in = x;
    ComplexGrid out(x.rows(), x.cols());
    cv::Mat dst = detail::view(out);
    cv::dft(detail::view(in), dst, cv::DFT_COMPLEX_OUTPUT);
    assert(dst.data == reinterpret_cast<uchar*>(out.data()));
    return out;
}

inline ComplexGrid dft2(const ComplexGrid& x)
{
    ComplexGrid in = x;
    ComplexGrid out(x.rows(), x.cols());
    cv::Mat dst = detail::view(out);
    cv::dft(detail::view(in), dst);
    return out;
}

inline ComplexGrid idft2(const ComplexGrid& x)
{
    ComplexGrid in = x;
    ComplexGrid out(x.rows(), x.cols());
    cv::Mat dst = detail::view(out);
    cv::dft(detail::view(in), dst, cv::DFT_INVERSE | cv::DFT_SCALE);
    return out;
}

/// Real part of the inverse transform.
inline RealGrid idft2_real(const ComplexGrid& x)
{
    ComplexGrid c = idft2(x);
    RealGrid out(c.rows(), c.cols());
    for (std::size_t i = 0; i < c.size(); ++i)
        out.data()[i] = c.data()[i].real();
    return out;
}

/// Row-wise 1-D transforms (each row independently), same normalization.
inline ComplexGrid dft_rows(const RealGrid& x)
{
    RealGrid in = x;
    ComplexGrid out(x.rows(), x.cols());
    cv::Mat dst = detail::view(out);
    cv::dft(detail::view(in), dst, cv::DFT_COMPLEX_OUTPUT | cv::DFT_ROWS);
    return out;
}

inline ComplexGrid idft_rows(const ComplexGrid& x)
{
    ComplexGrid in = x;
    ComplexGrid out(x.rows(), x.cols());
    cv::Mat dst = detail::view(out);
    cv::dft(detail::view(in), dst, cv::DFT_INVERSE | cv::DFT_SCALE | cv::DFT_ROWS);
    return out;
}

} // namespace facf
