import logging
from pathlib import Path
from typing import Dict

import streamlit as st

from ..config import Config

# Configuration du logger
logger = logging.getLogger('share_tab')


def generate_share_text(entry: Dict) -> str:
    """Résumé en texte brut d'une exécution, à coller dans un mail ou un ticket."""
    try:
        payload = entry.get("payload") or {}
        command = entry["command"]
        body = f"""Hello,

Here are the results of the {command} run "{entry.get('name', command)}":

SUMMARY:
• exit code {entry['exit_code']}
• config hash {entry.get('config_hash', '?')[:12]}
• tool version {payload.get('tool_version', Config.TOOL_VERSION)}
• duration {entry.get('execution_time', 0.0):.2f}s"""

        if command == 'estimate' and payload:
            body += f"\n\nESTIMATE:\n• {payload['kind']} = {payload['value']:.6g} ({payload['objective']})"
            body += f"\n• grid h = {payload['h']:.4g}"
            body += f"\n• admissible witness: {'yes' if payload['admissibility'].get('all_ok') else 'NO'}"
            for key, value in sorted((payload.get('metadata') or {}).items()):
                if key.endswith('equivalent'):
                    body += f"\n• {key} = {value:.6g}"
        elif command == 'certify' and payload:
            body += f"\n\nJACOBIAN CERTIFICATION:\n• max |det DT| = {payload['max']:.6g}"
            body += f"\n• declared bound {payload['declared_bound']:.6g} (tolerance {payload['tolerance']:.3g})"
            body += f"\n• verdict: {payload['verdict'].upper()}"
            if payload['verdict'] == 'fail':
                body += f"\n• ⚠️ bound exceeded at {payload['argmax']}"
        elif command == 'chords' and payload:
            body += f"\n\nCHORDS:\n• {payload['chord_count']} chords found"
            if payload.get('min_time') is not None:
                body += f"\n• shortest chord time {payload['min_time']:.6g}"
            rescaling = (payload.get('details') or {}).get('rescaling')
            if rescaling:
                body += f"\n• rescaling check: {'ok' if rescaling['ok'] else 'FAILED'}"

        summary = Path(entry.get("out_dir", "")) / 'summary.txt'
        if command == 'theorems' and summary.is_file():
            body += "\n\nTHEOREM CHECKS:\n" + summary.read_text(encoding='utf-8')

        body += f"\n\nARTIFACTS ({entry.get('out_dir', '')}):"
        for name in entry.get("artifacts", {}):
            body += f"\n• {name}"
        body += "\n\nBest regards"
        return body
    except Exception as e:
        logger.error(f"Error generating share text: {str(e)}")
        return "Error generating the summary. Please try again."


def display():
    """Affiche l'onglet de partage."""
    entry = st.session_state.last_run or st.session_state.last_certification
    if entry is None:
        st.info("ℹ️ Please run something first in the Runs or Certify tab.")
        return

    st.header("📧 Share Results", divider="rainbow")
    text = generate_share_text(entry)
    st.text_area("Summary", text, height=400)
    st.download_button("📥 Download summary", text, f"{entry['command']}_summary.txt", "text/plain")
