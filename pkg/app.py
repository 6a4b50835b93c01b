# Poisson Bracket Lab - Main Application

import streamlit as st

from src.config import Config
from src.ui import initialize_session_state, get_app_configuration
from src.ui import runs_tab, certify_tab, history_tab, share_tab
from src.utils import configure_logging


def main():
    st.set_page_config(
        page_title="Poisson Bracket Lab",
        page_icon="🧮",
        layout="wide"
    )

    configure_logging()
    initialize_session_state()

    # Update configuration from UI
    config = get_app_configuration()
    Config.update(**config)

    # Main navigation
    tabs = st.tabs(["Runs", "Certify", "History", "Share"])

    with tabs[0]:
        runs_tab.display()
    with tabs[1]:
        certify_tab.display()
    with tabs[2]:
        history_tab.display()
    with tabs[3]:
        share_tab.display()


if __name__ == "__main__":
    main()
