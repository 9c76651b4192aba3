import asyncio
from abc import ABC, abstractmethod
from collections.abc import Awaitable, Callable
from typing import Any, TypeVar

from pydantic import BaseModel, ValidationError

from core.logging_config import get_tool_logger
from core.protocol_definitions import ToolRequest, ToolResponse

T = TypeVar("T")

Handler = tuple[type[BaseModel], Callable[[Any], Awaitable[BaseModel]]]


class BaseTool(ABC):
    "Abstract base class for all tools"

    def __init__(self, tool_name: str, config: dict[str, Any] | None = None):
        self.tool_name = tool_name
        self.config = config if config is not None else {}
        self.logger = get_tool_logger(self.tool_name)
        self.logger.info(f"Tool '{self.tool_name}' initialized.")

    @abstractmethod
    def handlers(self) -> dict[str, Handler]:
        "Maps each action name to its params model and handler coroutine."

    async def execute(self, request: ToolRequest) -> ToolResponse:
        self.logger.info(f"Received request: {request.action} with params: {request.params}")
        handler = self.handlers().get(request.action)
        if handler is None:
            return self._create_error_response(
                f"Unknown action: {request.action} for tool: {self.tool_name}", request_params=request.params
            )
        params_model, action_handler = handler
        try:
            params = params_model(**request.params)
        except ValidationError as e:
            return self._create_error_response(f"Invalid parameters for {request.action}: {e}", request.params)
        try:
            response_data_model = await action_handler(params)
            return self._create_success_response(data=response_data_model.model_dump(mode="json"))
        except Exception as e:
            self.logger.exception(f"Error in {request.action}: {e!s}")
            return self._create_error_response(f"Error in {request.action}: {e!s}", request_params=request.params)

    async def run_blocking(self, fn: Callable[..., T], *args: Any) -> T:
        "Runs CPU-bound library code off the event loop."
        loop = asyncio.get_running_loop()
        return await loop.run_in_executor(None, fn, *args)

    def config_value(self, key: str, default: T, cast: Callable[[str], T] | None = None) -> T:
        raw = self.config.get(key)
        if raw is None:
            return default
        try:
            return (cast or type(default))(raw)
        except (TypeError, ValueError):
            self.logger.warning(f"Bad config value {key}={raw!r}; using {default!r}")
            return default

    def _create_success_response(self, data: dict[str, Any] | None = None) -> ToolResponse:
        self.logger.debug(f"Action successful. Data: {str(data)[:200]}...")
        return ToolResponse(status="success", data=data, error_message=None)

    def _create_error_response(self, error_message: str, request_params: dict[str, Any] | None = None) -> ToolResponse:
        self.logger.error(f"Action failed. Error: {error_message}. Request params: {request_params}")
        return ToolResponse(status="error", data=None, error_message=error_message)
