"""Support-set voting for distributed greedy-pursuit sparse recovery.

Modules
-------
sigmodel
    Signal, support-layout and measurement generation.
pursuit
    Subspace pursuit.
channel
    Idealized miss/false-alarm channel and epsilon estimation.
voting
    Majority and consensus fusion of support estimates.
analysis
    Closed-form conditional detection probabilities.
oracle
    Exact enumeration used to check the closed forms.
harness
    Monte Carlo experiments and CSV output.
"""
from . import analysis, channel, oracle, pursuit, sigmodel, voting
from .analysis import (
    MixedParams,
    VoteEvent,
    consensus_prob_given_hit,
    consensus_prob_given_miss,
    joint_event_prob,
    majority_detect_prob,
)
from .channel import ChannelParams, estimate_epsilon, ideal_channel
from .pursuit import subspace_pursuit
from .sigmodel import ModelConfig, SupportModel, draw_sensor, draw_supports
from .voting import consensus, majority

__version__ = "0.1.0"
