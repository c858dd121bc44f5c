"""Ultrasonic hand-gesture recognition with one transmitter and one receiver.

Pipeline: LFM pulse train -> (simulated) echoes -> matched filtering ->
clutter removal -> motion profile -> RSS / range features -> LS-SVM tree.
"""

from usgesture.classifier import (HierarchyModel, KernelParams, LsSvmModel, classify_gesture,
                                  kernel_eval, lssvm_decide, lssvm_train, train_hierarchy)
from usgesture.dsp import (CorrelationFrame, DeclutterState, MotionFrame, block_correlate,
                           cross_correlate, declutter, estimate_tof_rss)
from usgesture.features import (MotionProfile, Peak, RangeMatrix, RssVector, find_peaks,
                                flatten_features, range_matrix, rss_vector)
from usgesture.pulse import PulseTrainConfig, Waveform, make_chirp, make_pulse_train
from usgesture.simulator import (GestureKind, Scene, Trajectory, default_trajectory,
                                 range_to_delay, simulate_block, simulate_gesture)

__version__ = "0.1.0"
