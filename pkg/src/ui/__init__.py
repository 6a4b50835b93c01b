from pathlib import Path
from typing import Dict, Any

import streamlit as st

from ..config import Config


def initialize_session_state():
    """Initialize session state variables."""
    if 'last_run' not in st.session_state:
        st.session_state.last_run = None
    if 'last_certification' not in st.session_state:
        st.session_state.last_certification = None
    if 'history' not in st.session_state:
        st.session_state.history = []


def get_app_configuration() -> Dict[str, Any]:
    """Get application configuration from sidebar."""
    with st.sidebar:
        with st.expander("⚙️ Configuration"):
            config = {
                "MAX_WORKERS": st.slider("Max workers", 1, 16, Config.MAX_WORKERS,
                                         key="global_workers"),
                "JACOBIAN_SAMPLES": st.slider("Jacobian samples per axis", 11, 801, Config.JACOBIAN_SAMPLES,
                                              step=10, key="global_samples"),
                "DEFAULT_DT": st.select_slider("Flow time step", options=[1e-4, 5e-4, 1e-3, 5e-3, 1e-2],
                                               value=Config.DEFAULT_DT, key="global_dt"),
            }

            st.markdown("---")
            config["RUNS_DIR"] = Path(st.text_input("Runs directory", str(Config.RUNS_DIR), key="global_runs_dir"))
            return config


__all__ = ['initialize_session_state', 'get_app_configuration']
