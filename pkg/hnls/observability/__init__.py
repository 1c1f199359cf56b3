# Import observability utilities
from .logger import configure_logging, get_logger, log_event
from .traces import add_step, end_trace, new_trace, record_step
