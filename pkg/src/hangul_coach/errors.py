"""Common base class for every domain error raised by this package.

The CLI maps any HangulCoachError to exit code 1; the service maps them
to HTTP status codes. Concrete error types live in their owning modules.
"""


class HangulCoachError(Exception):
    pass
