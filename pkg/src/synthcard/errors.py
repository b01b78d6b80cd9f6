class SynthcardError(Exception):
    pass


class ConfigError(SynthcardError):
    """Invalid configuration.  ``problems`` lists every ``(field path, message)`` found."""

    def __init__(self, message, problems=None):
        super().__init__(message)
        self.problems = list(problems or [])


class CalibrationError(SynthcardError):
    def __init__(self, message, pair=None, completion=None):
        super().__init__(message)
        self.pair = pair
        self.completion = completion


class DatasetError(SynthcardError):
    """Malformed dataset file; ``row`` is the 1-based data row number when known."""

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row
