#pragma once

#include <string>

#include "hsn/net_model.hpp"

#ifndef HSN_DATA_DIR
#error "HSN_DATA_DIR must be defined by the build"
#endif

namespace hsn::testutil {

inline std::string dataPath(const std::string& name) {
    return std::string(HSN_DATA_DIR) + "/" + name;
}

inline const NetworkModel& net1() {
    static const NetworkModel model = loadInpFile(dataPath("net1.inp"));
    return model;
}

/// The junction-only Net1 adjacency in the label order 10, 11, 12, 13, 21,
/// 22, 23, 31, 32.
inline Eigen::MatrixXd net1Adjacency() {
    Eigen::MatrixXd a(9, 9);
    a << 0, 1, 0, 0, 0, 0, 0, 0, 0,  //
        1, 0, 1, 0, 1, 0, 0, 0, 0,   //
        0, 1, 0, 1, 0, 1, 0, 0, 0,   //
        0, 0, 1, 0, 0, 0, 1, 0, 0,   //
        0, 1, 0, 0, 0, 1, 0, 1, 0,   //
        0, 0, 1, 0, 1, 0, 1, 0, 1,   //
        0, 0, 0, 1, 0, 1, 0, 0, 0,   //
        0, 0, 0, 0, 1, 0, 0, 0, 1,   //
        0, 0, 0, 0, 0, 1, 0, 1, 0;
    return a;
}

}  // namespace hsn::testutil
