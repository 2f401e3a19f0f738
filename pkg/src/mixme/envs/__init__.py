from mixme.envs.arm import ArmEnv, arm_evaluate, forward_kinematics
from mixme.envs.base import (
    NEUTRAL,
    EnvModifiers,
    EnvSpec,
    Environment,
    EvalResult,
    StepResult,
    behaviour_descriptor,
    single_agent_wrapper,
)
from mixme.envs.gait import GaitConstants, GaitEnv, GaitState

__all__ = [
    "ArmEnv",
    "EnvModifiers",
    "EnvSpec",
    "Environment",
    "EvalResult",
    "GaitConstants",
    "GaitEnv",
    "GaitState",
    "NEUTRAL",
    "StepResult",
    "arm_evaluate",
    "behaviour_descriptor",
    "forward_kinematics",
    "single_agent_wrapper",
]
