# core/config_loader.py
import configparser
import logging
import os
from typing import Any

from dotenv import load_dotenv

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = "config/main_config.ini"

_config_ini: configparser.ConfigParser | None = None
_env_loaded = False


def load_configurations(config_file_path: str = DEFAULT_CONFIG_PATH, env_file_path: str | None = None):
    """
    Loads the .env file and the INI config file. Environment variables win over INI values
    when both define a key. Call once at startup; later calls are no-ops until
    `reset_configurations()`.

    Args:
        config_file_path (str): Path to the INI configuration file.
        env_file_path (str, optional): Path to the .env file. If None, dotenv searches for one.
    """
    global _config_ini, _env_loaded

    if not _env_loaded:
        if env_file_path:
            loaded = load_dotenv(dotenv_path=env_file_path, override=True)
            logger.debug(f".env file loaded from specified path: {env_file_path}, Loaded: {loaded}")
        else:
            loaded = load_dotenv(override=True)
            logger.debug(f".env file loaded from default path. Loaded: {loaded}")
        _env_loaded = True

    if _config_ini is None:
        _config_ini = configparser.ConfigParser()
        if not os.path.exists(config_file_path):
            logger.warning(f"INI config file not found at {config_file_path}. Proceeding without INI settings.")
            return
        try:
            _config_ini.read(config_file_path)
            logger.debug(f"INI config file '{config_file_path}' loaded successfully.")
        except configparser.Error as e:
            logger.error(f"Error reading INI config file {config_file_path}: {e}")
            _config_ini = configparser.ConfigParser()


def reset_configurations():
    "Forgets loaded settings so the next load_configurations() reads from disk again."
    global _config_ini, _env_loaded
    _config_ini = None
    _env_loaded = False


def _env_names(section: str, key: str) -> list[str]:
    names = []
    if section.upper() == "GENERAL":
        names.append(key.upper())
    names.append(f"{section.upper()}_{key.upper()}")
    return names


def get_setting(
    section: str,
    key: str,
    default: Any = None,
    is_bool: bool = False,
    is_int: bool = False,
    is_float: bool = False,
) -> Any:
    """
    Retrieves a configuration setting: environment variable (SECTION_KEY, or bare KEY for the
    'General' section) first, then the INI file, then `default`.

    Args:
        section (str): INI section, e.g. 'General' or 'BenchTool'.
        key (str): Key within the section.
        default (optional): Value returned when the key is found nowhere.
        is_bool, is_int, is_float (bool): Convert the raw string to that type.

    Returns:
        The setting converted as requested, or `default` when conversion fails.
    """
    if not _env_loaded or _config_ini is None:
        logger.debug("Configurations not loaded yet by get_setting. Loading now with default paths.")
        load_configurations()

    env_var_names_to_check = _env_names(section, key)
    value = None
    source = "default"

    for env_var_name in env_var_names_to_check:
        env_value = os.getenv(env_var_name)
        if env_value is not None:
            value = env_value
            source = f"env ('{env_var_name}')"
            break

    if value is None and _config_ini is not None and _config_ini.has_option(section, key):
        value = _config_ini.get(section, key)
        source = f"ini ('{section}.{key}')"

    if value is None:
        if default is None:
            logger.warning(
                f"Setting '{key}' in section '{section}' (env vars: {env_var_names_to_check}) "
                "not found and no default provided."
            )
            return None
        value = default
        source = "default_value"

    logger.debug(f"Setting '{section}.{key}': Found in '{source}'. Raw value: '{value}'")

    try:
        if is_bool:
            if isinstance(value, bool):
                return value
            return str(value).lower() in ["true", "1", "t", "y", "yes", "on"]
        if is_int:
            return int(value)
        if is_float:
            return float(value)
    except ValueError:
        logger.error(f"Could not convert '{value}' for '{section}.{key}' to the requested type. Using default.")
        return default
    return value


def get_section(section: str) -> dict[str, str]:
    """
    All keys of an INI section as raw strings, each passed through `get_setting` so
    environment overrides apply. Tools receive this dict as their `config`.
    """
    if not _env_loaded or _config_ini is None:
        load_configurations()
    if _config_ini is None or not _config_ini.has_section(section):
        logger.debug(f"Section '{section}' not present in INI config.")
        return {}
    return {key: get_setting(section, key) for key in _config_ini.options(section)}
