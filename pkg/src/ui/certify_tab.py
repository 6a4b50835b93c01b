import logging
import math
from typing import Dict

import streamlit as st

from ..config import Config
from .history_tab import save_to_history
from .runs_tab import display_run, execute_run

# Configuration du logger
logger = logging.getLogger('certify_tab')

RECIPE_KINDS = ["identity", "homothety", "rotation", "translation", "pseudoretract_smooth",
                "pseudoretract_polygon", "pseudoretract", "power_map"]

DOMAIN_KINDS = {
    "disc": {"kind": "disc", "radius": 1.0},
    "square": {"kind": "square", "side": 1.0},
    "triangle": {"kind": "triangle"},
}


def build_recipe(kind: str, params: Dict) -> Dict:
    """Recette de carte à partir des champs saisis (les clés inutiles sont ignorées)."""
    recipe = {"kind": kind}
    if kind == "homothety":
        recipe["area_factor"] = float(params["area_factor"])
    elif kind == "rotation":
        recipe["angle"] = float(params["angle"])
    elif kind == "translation":
        recipe["vector"] = [float(v) for v in params["vector"]]
    elif kind.startswith("pseudoretract"):
        recipe["domain"] = dict(DOMAIN_KINDS[params["domain"]])
        recipe["eps"] = float(params["eps"])
    elif kind == "power_map":
        recipe["k"] = int(params["k"])
        recipe["eps"] = float(params["eps"])
    if params.get("declared_bound"):
        recipe["declared_bound"] = float(params["declared_bound"])
    return recipe


def display():
    """Affiche l'onglet de certification jacobienne."""
    st.header("📐 Certify a map", divider="rainbow")

    kind = st.selectbox("Map", RECIPE_KINDS)
    params = {}
    if kind == "homothety":
        params["area_factor"] = st.number_input("Area factor", min_value=0.01, value=2.0)
    elif kind == "rotation":
        params["angle"] = st.slider("Angle", 0.0, 2 * math.pi, math.pi / 4)
    elif kind == "translation":
        col1, col2 = st.columns(2)
        with col1:
            vx = st.number_input("Vector x", value=0.5)
        with col2:
            vy = st.number_input("Vector y", value=0.0)
        params["vector"] = (vx, vy)
    elif kind.startswith("pseudoretract"):
        domains = ["disc"] if kind == "pseudoretract_smooth" else list(DOMAIN_KINDS)
        params["domain"] = st.selectbox("Target domain", domains)
        params["eps"] = st.slider("ε", 0.01, 0.5, 0.1)
    elif kind == "power_map":
        params["k"] = st.number_input("k", min_value=1, value=2, step=1)
        params["eps"] = st.slider("ε", 0.01, 0.5, 0.1)

    if st.checkbox("Override declared bound"):
        params["declared_bound"] = st.number_input("Declared bound", min_value=0.01, value=1.0)

    col1, col2 = st.columns(2)
    with col1:
        half = st.number_input("Region half-width", min_value=0.1, value=2.0)
    with col2:
        n = st.number_input("Samples per axis", min_value=3, value=Config.JACOBIAN_SAMPLES, step=10)

    if st.button("✔️ Certify", type="primary"):
        config = {"recipe": build_recipe(kind, params), "region": [-half, half, -half, half], "n": int(n)}
        with st.spinner("Sampling the Jacobian..."):
            try:
                entry = execute_run("certify", config)
            except Exception as e:
                st.error(f"Certification failed: {str(e)}")
                logger.error(f"Error in certification: {str(e)}")
                return
        st.session_state.last_certification = entry
        save_to_history(entry)

    entry = st.session_state.last_certification
    if entry is not None:
        payload = entry.get("payload") or {}
        if payload:
            col1, col2, col3 = st.columns(3)
            with col1:
                st.metric("max |det DT|", f"{payload['max']:.6g}")
            with col2:
                st.metric("Declared bound", f"{payload['declared_bound']:.6g}")
            with col3:
                st.metric("Verdict", payload["verdict"])
            if payload["verdict"] == "fail":
                st.warning(f"Bound exceeded at {payload['argmax']}")
        display_run(entry)
