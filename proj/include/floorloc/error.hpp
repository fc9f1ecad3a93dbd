#pragma once

#include <stdexcept>
#include <string>

namespace floorloc {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define FLOORLOC_DEFINE_ERROR(Name)                                       \
    struct Name : Error {                                                 \
        explicit Name(const std::string& msg) : Error(#Name ": " + msg) {} \
    }

// geometry
FLOORLOC_DEFINE_ERROR(InvalidDepth);
FLOORLOC_DEFINE_ERROR(OutOfBounds);
FLOORLOC_DEFINE_ERROR(InvalidRange);
FLOORLOC_DEFINE_ERROR(InvalidIntrinsics);
FLOORLOC_DEFINE_ERROR(InvalidRotation);

// floorplan / raycasting
FLOORLOC_DEFINE_ERROR(InvalidOrigin);
FLOORLOC_DEFINE_ERROR(InvalidGrid);

// mining
FLOORLOC_DEFINE_ERROR(IntrinsicsMismatch);

// contrastive
FLOORLOC_DEFINE_ERROR(EmptyMatchSet);
FLOORLOC_DEFINE_ERROR(InvalidTemperature);

// observation model
FLOORLOC_DEFINE_ERROR(DownsampleNotSupported);
FLOORLOC_DEFINE_ERROR(InvalidWeight);
FLOORLOC_DEFINE_ERROR(InvalidDistribution);
FLOORLOC_DEFINE_ERROR(HypothesisGridMismatch);

// filter
FLOORLOC_DEFINE_ERROR(ScanShapeMismatch);
FLOORLOC_DEFINE_ERROR(EmptyHypothesisSpace);
FLOORLOC_DEFINE_ERROR(BeliefCollapsed);

// simulation
FLOORLOC_DEFINE_ERROR(InfeasibleSpec);
FLOORLOC_DEFINE_ERROR(PlacementFailed);
FLOORLOC_DEFINE_ERROR(TrajectoryStuck);

// metrics
FLOORLOC_DEFINE_ERROR(EmptyRecords);
FLOORLOC_DEFINE_ERROR(NoSuccesses);

// I/O
FLOORLOC_DEFINE_ERROR(IoError);
FLOORLOC_DEFINE_ERROR(ParseError);

#undef FLOORLOC_DEFINE_ERROR

}  // namespace floorloc
