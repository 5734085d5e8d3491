"""Zero-dynamics attacks on cone-invariant systems and sensor-placement defenses."""

__version__ = "0.1.0"
