import json
import logging
import time
from pathlib import Path
from typing import Dict, Optional

import pandas as pd
import streamlit as st

from ..cli.commands import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, EXIT_VERDICT
from ..cli.main import run
from ..config import Config
from ..utils import canonical_json, config_hash, get_data_file_path
from .history_tab import save_to_history

# Configuration du logger
logger = logging.getLogger('runs_tab')

MAIN_ARTIFACT = {
    'estimate': 'estimate.json',
    'certify': 'certification.json',
    'theorems': 'summary.json',
    'chords': 'chords.json',
}

EXIT_LABELS = {
    EXIT_OK: '✅ success',
    EXIT_VERDICT: '❌ verdict failed',
    EXIT_CONFIG: '⚠️ invalid configuration',
    EXIT_RUNTIME: '💥 runtime error',
}

# Aperçu limité des CSV volumineux (bracket.csv)
MAX_PREVIEW_ROWS = 500


def guess_command(config: Dict) -> str:
    """Commande correspondant aux clés de premier niveau d'une config."""
    if 'recipe' in config:
        return 'certify'
    if 'checks' in config:
        return 'theorems'
    if 'hamiltonian' in config or 'experiment' in config or config.get('fixture') in ('shear', 'annuli'):
        return 'chords'
    return 'estimate'


def list_example_configs() -> Dict[str, Path]:
    """Configs livrées dans data/configs et data/suites."""
    examples = {}
    for folder in ('configs', 'suites'):
        for path in sorted(get_data_file_path(folder).glob('*.json')):
            examples[f"{folder}/{path.name}"] = path
    return examples


def collect_artifacts(out_dir: Path) -> Dict[str, str]:
    return {p.name: str(p) for p in sorted(out_dir.iterdir()) if p.is_file()} if out_dir.exists() else {}


def execute_run(command: str, config: Dict, runs_dir: Optional[Path] = None) -> Dict:
    """
    Exécute une commande du laboratoire et construit l'entrée d'historique.

    La config est écrite dans le dossier de sortie, qui dépend de son empreinte.

    Args:
        command: estimate, certify, theorems ou chords
        config: Configuration JSON déjà chargée
        runs_dir: Dossier parent des exécutions

    Returns:
        Dict: timestamp, commande, code de sortie, artefacts et contenu de l'artefact principal
    """
    runs_dir = Path(runs_dir or Config.RUNS_DIR)
    digest = config_hash(config)
    out_dir = runs_dir / f"ui-{command}-{digest[:12]}"
    out_dir.mkdir(parents=True, exist_ok=True)
    config_path = out_dir / 'config.json'
    config_path.write_text(canonical_json(config), encoding='utf-8')

    start_time = time.time()
    code = run(command, str(config_path), str(out_dir))
    execution_time = time.time() - start_time

    main_path = out_dir / MAIN_ARTIFACT[command]
    payload = json.loads(main_path.read_text(encoding='utf-8')) if main_path.exists() else None
    logger.info(f"UI run {command} exited with {code} in {execution_time:.2f}s -> {out_dir}")
    return {
        "timestamp": time.strftime("%Y-%m-%d %H:%M:%S"),
        "command": command,
        "name": config.get('name', command),
        "config": config,
        "config_hash": digest,
        "exit_code": code,
        "out_dir": str(out_dir),
        "artifacts": collect_artifacts(out_dir),
        "payload": payload,
        "execution_time": execution_time,
    }


def read_csv_artifacts(entry: Dict) -> Dict[str, pd.DataFrame]:
    """Artefacts CSV d'une exécution, chargés en DataFrame."""
    frames = {}
    for name, path in entry.get("artifacts", {}).items():
        if not name.endswith('.csv'):
            continue
        try:
            frames[name] = pd.read_csv(path)
        except Exception as e:
            logger.error(f"Could not read {path}: {str(e)}")
    return frames


def display_run(entry: Dict):
    """Résultats d'une exécution: code de sortie, artefact principal, tables."""
    col1, col2, col3 = st.columns(3)
    with col1:
        st.metric("Command", entry["command"])
    with col2:
        st.metric("Exit code", entry["exit_code"])
    with col3:
        st.metric("Duration", f"{entry['execution_time']:.2f}s")
    st.markdown(f"**{EXIT_LABELS.get(entry['exit_code'], entry['exit_code'])}**: `{entry['out_dir']}`")

    if entry["payload"] is not None:
        if entry["command"] == 'estimate':
            st.metric(entry["payload"].get('kind', 'value'), f"{entry['payload']['value']:.6g}")
        with st.expander(MAIN_ARTIFACT[entry["command"]]):
            st.json(entry["payload"])

    summary = Path(entry["out_dir"]) / 'summary.txt'
    if summary.exists():
        st.code(summary.read_text(encoding='utf-8'))

    for name, frame in read_csv_artifacts(entry).items():
        st.markdown(f"#### {name}")
        if len(frame) > MAX_PREVIEW_ROWS:
            st.caption(f"First {MAX_PREVIEW_ROWS} of {len(frame)} rows")
        st.dataframe(frame.head(MAX_PREVIEW_ROWS), use_container_width=True)


def display():
    """Affiche l'onglet des exécutions."""
    st.header("🧮 Runs", divider="rainbow")

    examples = list_example_configs()
    source = st.radio("Configuration source", ["Example", "Upload"], horizontal=True)
    text = ""
    if source == "Example" and examples:
        choice = st.selectbox("Example configuration", list(examples))
        text = examples[choice].read_text(encoding='utf-8')
    elif source == "Upload":
        uploaded = st.file_uploader("JSON config", type=["json"])
        if uploaded is not None:
            text = uploaded.getvalue().decode('utf-8')

    text = st.text_area("Configuration (JSON)", text, height=300)
    if not text.strip():
        st.info("Choose or upload a configuration to start.")
        return

    try:
        config = json.loads(text)
    except json.JSONDecodeError as e:
        st.error(f"Invalid JSON: {str(e)}")
        return

    commands = list(MAIN_ARTIFACT)
    command = st.selectbox("Command", commands, index=commands.index(guess_command(config)))

    if st.button("▶️ Run", type="primary"):
        with st.spinner(f"Running {command}..."):
            try:
                entry = execute_run(command, config)
            except Exception as e:
                st.error(f"Run failed: {str(e)}")
                logger.error(f"Error in UI run: {str(e)}")
                return
        st.session_state.last_run = entry
        save_to_history(entry)

    if st.session_state.last_run is not None:
        display_run(st.session_state.last_run)
