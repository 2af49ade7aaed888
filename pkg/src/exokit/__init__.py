"""Hardware-free toolkit for a modular backdrivable hip/knee exoskeleton.

Modules: ``actuator`` (torque model), ``sysid`` (filtered least squares),
``control`` (gravity compensation), ``benchsim`` and ``squat`` (simulation),
``emg`` (effort analysis), ``cli`` (command line).
"""
__version__ = "0.1.0"
