import importlib
import inspect
from pathlib import Path
from typing import Any, Dict, Optional, Type, Union

from rich.console import Console

from src.core.errors import ConfigError
from src.core.interfaces import BaseOperator, ComponentConfig

PLUGIN_BASE_DIRS = [
    Path(__file__).parent.parent,
]

console = Console(stderr=True)


def get_operators() -> Dict[str, Type[BaseOperator]]:
    """
    Scans plugin directories and returns reconstruction operator classes keyed by name.
    Operators are bound to a manifold, so classes are returned rather than instances.
    """
    operators: Dict[str, Type[BaseOperator]] = {}

    for base_dir in PLUGIN_BASE_DIRS:
        if not base_dir.exists():
            continue

        # Components live in 'plugins' and 'custom' under 'src'
        for folder_name in ["plugins", "custom"]:
            category_path = base_dir / folder_name
            if not category_path.exists() or not category_path.is_dir():
                continue

            for py_file in sorted(category_path.rglob("*.py")):
                if py_file.name.startswith("__") or py_file.name == "config.py":
                    continue

                # Import path starts at 'src'; base_dir.parent is the project root
                relative_path = py_file.relative_to(base_dir.parent)
                module_name = ".".join(relative_path.with_suffix("").parts)

                try:
                    module = importlib.import_module(module_name)
                except Exception as e:
                    console.print(f"[red]Error loading module {module_name}: {e}[/red]")
                    continue

                for _, obj in inspect.getmembers(module, inspect.isclass):
                    # Only classes defined in this module, not imported ones
                    if obj.__module__ != module.__name__ or inspect.isabstract(obj):
                        continue
                    if issubclass(obj, BaseOperator) and obj is not BaseOperator:
                        operators[obj.name] = obj

    return operators


def create_operator(
    name: str, manifold: Any, config: Optional[Union[ComponentConfig, dict]] = None
) -> BaseOperator:
    operators = get_operators()
    if name not in operators:
        raise ConfigError(f"Unknown operator '{name}'. Available: {', '.join(sorted(operators)) or 'none'}")
    return operators[name](manifold, config)
