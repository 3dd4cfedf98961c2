class ConfigurationError(ValueError):
    """Invalid model, gain, or simulation configuration."""
