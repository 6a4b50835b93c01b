import logging
from datetime import datetime
from io import BytesIO, StringIO
from typing import Dict, List, Optional, Tuple

import pandas as pd
import streamlit as st

# Configuration du logger
logger = logging.getLogger('history_tab')

MAX_HISTORY_ENTRIES = 100
# Excel limite les noms de feuilles à 31 caractères
MAX_SHEET_NAME = 31


def save_to_history(entry: Dict, history: Optional[List[Dict]] = None):
    """Ajoute une exécution à l'historique (les plus anciennes sont supprimées au-delà de la limite)."""
    try:
        if history is None:
            if 'history' not in st.session_state:
                st.session_state.history = []
            history = st.session_state.history
        if not isinstance(entry, dict) or not all(k in entry for k in ("timestamp", "command", "exit_code")):
            logger.error("Invalid data format for history entry")
            return
        if len(history) >= MAX_HISTORY_ENTRIES:
            history.pop(0)
        history.append(entry)
        logger.info(f"Added history entry {entry['command']} ({entry['exit_code']})")
    except Exception as e:
        logger.error(f"Error saving to history: {str(e)}")


def run_overview(entry: Dict) -> pd.DataFrame:
    """Tableau clé/valeur décrivant une exécution."""
    rows = [
        ("timestamp", entry["timestamp"]),
        ("command", entry["command"]),
        ("name", entry.get("name")),
        ("exit_code", entry["exit_code"]),
        ("config_hash", entry.get("config_hash")),
        ("out_dir", entry.get("out_dir")),
        ("execution_time", entry.get("execution_time")),
    ]
    payload = entry.get("payload") or {}
    for key in ("kind", "value", "objective", "verdict", "max", "declared_bound", "chord_count",
                "min_time", "status", "tool_version"):
        if key in payload:
            rows.append((key, payload[key]))
    return pd.DataFrame(rows, columns=["Field", "Value"]).astype({"Value": str})


def _write_sheets(writer, entry: Dict, tables: Dict[str, pd.DataFrame]):
    run_overview(entry).to_excel(writer, sheet_name="Run", index=False)
    for name, frame in tables.items():
        frame.to_excel(writer, sheet_name=name.rsplit('.', 1)[0][:MAX_SHEET_NAME], index=False)


def export_with_sheets(entry: Dict, tables: Dict[str, pd.DataFrame]) -> Tuple[Optional[BytesIO], Optional[str]]:
    """Crée un export Excel multi-feuilles: une feuille de synthèse puis une feuille par CSV."""
    filename = f"{entry['command']}_{datetime.now().strftime('%Y%m%d_%H%M%S')}"
    output = BytesIO()
    try:
        with pd.ExcelWriter(output, engine='openpyxl') as writer:
            _write_sheets(writer, entry, tables)
        output.seek(0)
        return output, filename
    except Exception as e:
        logger.error(f"Error writing Excel with openpyxl: {str(e)}")

    # Tenter avec un autre moteur comme xlsxwriter
    output = BytesIO()
    try:
        with pd.ExcelWriter(output, engine='xlsxwriter') as writer:
            _write_sheets(writer, entry, tables)
        output.seek(0)
        return output, filename
    except Exception as fallback_e:
        logger.error(f"Fallback Excel writing also failed: {str(fallback_e)}")
        return None, None


def history_frame(history: List[Dict]) -> pd.DataFrame:
    """Récapitulatif de l'historique, le plus récent en premier."""
    rows = []
    for entry in reversed(history):
        if not all(k in entry for k in ("timestamp", "command", "exit_code", "execution_time")):
            continue
        payload = entry.get("payload") or {}
        rows.append({
            "Date": entry["timestamp"],
            "Command": entry["command"],
            "Name": entry.get("name", ""),
            "Exit code": entry["exit_code"],
            "Value": payload.get("value", payload.get("max", payload.get("min_time"))),
            "Duration (s)": f"{entry['execution_time']:.2f}",
        })
    return pd.DataFrame(rows)


def display_history_entry(entry: Dict, idx: int):
    """Affiche les détails d'une entrée de l'historique."""
    from .runs_tab import display_run, read_csv_artifacts

    try:
        display_run(entry)
        st.markdown("#### Configuration")
        st.json(entry.get("config", {}))

        col1, col2 = st.columns([1, 3])
        with col1:
            if st.button("Reload this run", key=f"reload_{idx}"):
                st.session_state.last_run = entry
                st.success("✨ Run reloaded in the 'Runs' and 'Share' tabs")

            st.markdown("#### Export Options")
            export_format = st.radio("Export format", ["CSV", "Excel (multi-sheet)"], key=f"export_format_{idx}")
            tables = read_csv_artifacts(entry)
            stamp = entry['timestamp'].replace(' ', '_').replace(':', '-')
            if export_format == "CSV":
                output = StringIO()
                run_overview(entry).to_csv(output, index=False)
                st.download_button("📥 Download overview (CSV)", output.getvalue(),
                                   f"{entry['command']}_{stamp}.csv", "text/csv", key=f"download_csv_{idx}")
            else:
                output, filename = export_with_sheets(entry, tables)
                if output:
                    st.download_button("📥 Download run (Excel)", output.getvalue(), f"{filename}.xlsx",
                                       "application/vnd.openxmlformats-officedocument.spreadsheetml.sheet",
                                       key=f"download_excel_{idx}")
                else:
                    st.error("Excel export failed, see the logs")
    except Exception as e:
        st.error(f"Error displaying history entry: {str(e)}")
        logger.error(f"Error in display_history_entry: {str(e)}")


def display():
    """Affiche l'onglet historique."""
    if not st.session_state.history:
        st.info("No runs have been performed yet.")
        return

    st.markdown("### Run history")
    try:
        st.dataframe(history_frame(st.session_state.history), use_container_width=True)
        selected_idx = st.selectbox(
            "Select a run to view details",
            range(len(st.session_state.history)),
            format_func=lambda x: f"{st.session_state.history[-(x + 1)]['timestamp']} "
                                  f"{st.session_state.history[-(x + 1)]['command']}"
        )
        if selected_idx is not None:
            display_history_entry(st.session_state.history[-(selected_idx + 1)], selected_idx)
    except Exception as e:
        st.error(f"Error displaying history: {str(e)}")
        logger.error(f"Error in history display: {str(e)}")
