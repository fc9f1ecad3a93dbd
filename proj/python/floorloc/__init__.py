"""Floorplan localization toolkit: projection geometry, correspondence mining,
contrastive loss numerics, ray-scan rendering, and histogram-filter tracking."""

from ._core import (
    CameraIntrinsics,
    DepthDistribution,
    FloorlocError,
    MotionDelta,
    OccupancyGrid,
    Pose2,
    PosteriorGrid,
    RayScan,
    RigidPose3,
    ScenarioSpec,
    add_clutter,
    argmax_pose,
    combined_loss,
    depth_to_cloud,
    expected_scan,
    find_correspondences,
    floc_loss,
    free_poses,
    fuse,
    gen_floorplan,
    gen_trajectory,
    init_uniform,
    likelihood,
    observe_oracle,
    point_info_nce,
    point_info_nce_grad,
    predict,
    project,
    raycast,
    render_scan,
    single_frame_localize,
    success_rate,
    to_camera,
    to_world,
    track,
    unproject,
    uniform_depth_grid,
    update,
    upsample_rays,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
