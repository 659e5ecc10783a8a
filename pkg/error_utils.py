"""
Error handling and logging utilities for the canal surface toolkit
Provides the error taxonomy, CLI exit-code mapping, an error ledger and
performance logging shared by all computation modules.
"""

import json
import logging
import traceback
import sys
from datetime import datetime
from typing import Dict, Any, List, Optional
from functools import wraps

# Configure logging with detailed formatting; stdout is reserved for results
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    handlers=[
        logging.StreamHandler(sys.stderr)
    ]
)

logger = logging.getLogger(__name__)


class ErrorTypes:
    """Standard error types for consistent error handling"""
    INPUT_ERROR = "INPUT_ERROR"
    DEGENERATE_INPUT = "DEGENERATE_INPUT"
    COMPUTATION_ERROR = "COMPUTATION_ERROR"
    SAMPLING_ERROR = "SAMPLING_ERROR"
    NOT_GENERAL_TYPE = "NOT_GENERAL_TYPE"
    INTERNAL_ERROR = "INTERNAL_ERROR"


class ExitCodes:
    SUCCESS = 0
    COMPUTATION = 1
    INPUT = 2


class CanalError(Exception):
    """Base exception carrying structured data for reports and exit codes"""

    def __init__(self, message: str, error_type: str = ErrorTypes.INTERNAL_ERROR,
                 exit_code: int = ExitCodes.COMPUTATION, details: Dict[str, Any] = None):
        self.message = message
        self.error_type = error_type
        self.exit_code = exit_code
        self.details = details or {}
        self.timestamp = datetime.now().isoformat()
        super().__init__(self.message)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'error_type': self.error_type,
            'message': self.message,
            'details': self.details,
        }


class InputError(CanalError):
    """Malformed spine files, flags or configuration values"""

    def __init__(self, message: str, details: Dict[str, Any] = None):
        super().__init__(message, ErrorTypes.INPUT_ERROR, ExitCodes.INPUT, details)


class ComputationError(CanalError):
    """A pipeline stage could not produce its result"""

    def __init__(self, message: str, error_type: str = ErrorTypes.COMPUTATION_ERROR,
                 details: Dict[str, Any] = None):
        super().__init__(message, error_type, ExitCodes.COMPUTATION, details)


class DegenerateInputError(ComputationError):
    def __init__(self, message: str, details: Dict[str, Any] = None):
        super().__init__(message, ErrorTypes.DEGENERATE_INPUT, details)


class SamplingError(ComputationError):
    def __init__(self, message: str, details: Dict[str, Any] = None):
        super().__init__(message, ErrorTypes.SAMPLING_ERROR, details)


class NotGeneralTypeError(ComputationError):
    """Raised by degree prediction when a general-type condition fails"""

    def __init__(self, message: str, details: Dict[str, Any] = None):
        super().__init__(message, ErrorTypes.NOT_GENERAL_TYPE, details)


class ErrorLogger:
    """Centralized error logging with context and counts"""

    def __init__(self):
        self.error_counts = {}
        self.last_errors = []
        self.max_stored_errors = 100

    def log_error(self, error: Exception, context: Dict[str, Any] = None):
        """Record a pipeline failure with its exit code and the job context"""
        error_data = {
            'timestamp': datetime.now().isoformat(),
            'exit_code': exit_code_for(error),
            'error_type': getattr(error, 'error_type', type(error).__name__),
            'message': str(error),
            'context': context or {},
            'details': getattr(error, 'details', {}),
            'stack_trace': traceback.format_exc(),
        }

        logger.debug(f"{error_data['error_type']} (exit {error_data['exit_code']}): {error_data['message']}")
        logger.debug(f"Context: {json.dumps(error_data['context'], indent=2, default=str)}")
        logger.debug(f"Stack trace: {error_data['stack_trace']}")

        error_key = f"{error_data['error_type']}:{error_data['message'][:100]}"
        self.error_counts[error_key] = self.error_counts.get(error_key, 0) + 1

        self.last_errors.append(error_data)
        if len(self.last_errors) > self.max_stored_errors:
            self.last_errors.pop(0)

        return error_data


# Global error logger instance
error_logger = ErrorLogger()


def exit_code_for(error: Exception) -> int:
    """Map an exception raised by the pipeline to a process exit code"""
    if isinstance(error, CanalError):
        return error.exit_code
    return ExitCodes.COMPUTATION


def validate_job_fields(data: Dict[str, Any], required_fields: List[str]) -> None:
    """Validate that a parsed input document has the required fields"""
    if not isinstance(data, dict):
        raise InputError("Input document must be a JSON object")

    missing_fields = [field for field in required_fields if field not in data]
    if missing_fields:
        raise InputError(
            f"Missing required fields: {', '.join(missing_fields)}",
            {'missing_fields': missing_fields}
        )


def set_log_level(level: Optional[str]) -> None:
    """Apply a textual log level to the root logger"""
    if not level:
        return
    numeric = logging.getLevelName(level.upper())
    if not isinstance(numeric, int):
        raise InputError(f"Unknown log level: {level}", {'log_level': level})
    logging.getLogger().setLevel(numeric)


def log_performance(operation_name: str):
    """Decorator to log timing of expensive exact computations"""

    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            start_time = datetime.now()

            try:
                result = func(*args, **kwargs)
                duration = (datetime.now() - start_time).total_seconds() * 1000
                logger.info(f"Performance: {operation_name} completed in {duration:.2f}ms")
                return result
            except Exception as e:
                duration = (datetime.now() - start_time).total_seconds() * 1000
                logger.info(f"Performance: {operation_name} failed after {duration:.2f}ms - {str(e)}")
                raise

        return wrapper
    return decorator
