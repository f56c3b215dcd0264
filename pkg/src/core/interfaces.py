import hashlib
from abc import ABC, abstractmethod
from typing import Any, Generic, Optional, Type, TypeVar, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from src.core.errors import ConfigError


class ComponentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    enabled: bool = Field(default=True, description="Whether the component is offered for selection.")


TConfig = TypeVar("TConfig", bound=ComponentConfig)


class BaseComponent(ABC, Generic[TConfig]):
    """
    Base class for all pluggable components.
    Holds a validated Pydantic configuration and a stable identifier derived from it.
    """
    name: str
    config_class: Type[TConfig] = ComponentConfig  # type: ignore
    component_type: str = "component"

    def __init__(self, config: Optional[Union[TConfig, dict]] = None):
        self.config = self.load_config(config)

    def load_config(self, raw: Optional[Union[TConfig, dict]]) -> TConfig:
        """Validates raw settings against config_class, falling back to defaults when none are given."""
        if raw is None:
            return self.config_class()
        if isinstance(raw, self.config_class):
            return raw
        try:
            data = raw.model_dump() if isinstance(raw, BaseModel) else dict(raw)
            return self.config_class(**data)
        except ValidationError as e:
            raise ConfigError(f"Invalid settings for {self.name}: {e}") from e

    def update_config(self, new_data: dict):
        """Replaces configuration fields with new values, re-validating the whole model."""
        self.config = self.load_config({**self.config.model_dump(), **new_data})

    def describe(self) -> dict[str, str]:
        """Field name -> description, as declared on the config model."""
        return {
            field_name: field_info.description or field_name
            for field_name, field_info in self.config_class.model_fields.items()
        }

    @property
    def component_id(self) -> str:
        digest = hashlib.sha256(self.config.model_dump_json().encode("utf-8")).hexdigest()
        return f"{self.name}:{digest[:8]}"

    @abstractmethod
    def healthcheck(self) -> tuple[bool, str]:
        """Checks that the component can run with its current configuration."""
        pass


class BaseOperator(BaseComponent[TConfig]):
    """A reconstruction operator R bound to one generative manifold."""
    component_type = "operator"

    def __init__(self, manifold: Any, config: Optional[Union[TConfig, dict]] = None):
        self.manifold = manifold
        super().__init__(config)

    @property
    def operator_id(self) -> str:
        return self.component_id

    @abstractmethod
    def reconstruct(self, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Returns R(x). Deterministic operators ignore rng."""
        pass

    def __call__(self, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return self.reconstruct(x, rng)
