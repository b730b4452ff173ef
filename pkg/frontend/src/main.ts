// UI shell: screen flow, canvas rendering, and input routing for the two
// experiment apps.  Input comes either from the native pointer or from the
// driver bridge over WebSocket (cursor + cheek-twitch clicks).

import { VirtualKeyboard } from "./keyboard.js";
import { downloadText, logFilename, trialsToJsonl, typingToJsonl } from "./logio.js";
import { PopperSession } from "./popper.js";
import { SENTENCES, TypeWriterSession } from "./typewriter.js";
import { Ability, Device } from "./types.js";
import { ConnectionState, DriverSocket } from "./wsinput.js";

const WS_URL = `ws://${location.hostname || "localhost"}:8090`;

type Screen = "select" | "register" | "popper" | "typewriter";

interface AppState {
  screen: Screen;
  ability: Ability;
  device: Device;
  player: string;
  app: "popper" | "typewriter";
  cursor: [number, number];
  connection: ConnectionState | "local";
  paused: boolean;
  popper: PopperSession | null;
  typewriter: TypeWriterSession | null;
  keyboard: VirtualKeyboard | null;
}

function now(): number {
  return performance.now() / 1000;
}

function main(): void {
  const canvas = document.getElementById("board") as HTMLCanvasElement;
  const ctx = canvas.getContext("2d")!;
  const banner = document.getElementById("banner") as HTMLDivElement;
  const controls = document.getElementById("controls") as HTMLDivElement;

  const state: AppState = {
    screen: "select",
    ability: "special",
    device: "pointer",
    player: "",
    app: "popper",
    cursor: [canvas.width / 2, canvas.height / 2],
    connection: "local",
    paused: false,
    popper: null,
    typewriter: null,
    keyboard: null,
  };

  let socket: DriverSocket | null = null;

  function setBanner(text: string, visible: boolean): void {
    banner.textContent = text;
    banner.style.display = visible ? "block" : "none";
  }

  function connectDriver(): void {
    socket?.close();
    socket = new DriverSocket(WS_URL, {
      onEvent: (event) => {
        if (state.paused) {
          return;
        }
        if (event.kind === "move") {
          state.cursor = [event.x, event.y];
          state.popper?.cursorMove(event.x, event.y);
        } else if (event.kind === "down" && event.btn === "L") {
          handleClick(state.cursor[0], state.cursor[1]);
        } else if (event.kind === "mode") {
          setBanner(event.mode === "off" ? "mouse disabled (gesture)" : "", event.mode === "off");
        }
      },
      onConnection: (connectionState) => {
        state.connection = connectionState;
        state.paused = connectionState !== "connected";
        setBanner(
          connectionState === "connected" ? "" : `driver bridge: ${connectionState}...`,
          connectionState !== "connected",
        );
      },
    });
    socket.connect();
  }

  function handleClick(x: number, y: number): void {
    const t = now();
    if (state.screen === "popper" && state.popper) {
      if (state.popper.phase === "reward") {
        state.popper.continueFromReward(t);
      } else {
        state.popper.click(x, y, t);
      }
      if (state.popper.phase === "done") {
        offerDownloads();
      }
    } else if (state.screen === "typewriter" && state.typewriter && state.keyboard) {
      const key = state.keyboard.press(x, y);
      if (key && key !== "Shift") {
        state.typewriter.keyPress(key, t);
      }
      if (state.typewriter.phase === "done") {
        offerDownloads();
      }
    }
  }

  function offerDownloads(): void {
    controls.innerHTML = "";
    const btn = document.createElement("button");
    btn.textContent = "download session log";
    btn.onclick = () => {
      if (state.popper) {
        const log = state.popper.sessionLog();
        downloadText(logFilename(log, "trials"), trialsToJsonl(log.trials));
      }
      if (state.typewriter) {
        const log = state.typewriter.sessionLog();
        downloadText(logFilename(log, "typing"), typingToJsonl(log.typing));
      }
    };
    controls.appendChild(btn);
  }

  function startSession(): void {
    controls.innerHTML = "";
    if (state.device === "auxilio") {
      connectDriver();
    } else {
      state.connection = "local";
    }
    const t = now();
    if (state.app === "popper") {
      state.popper = new PopperSession({
        ability: state.ability,
        viewW: canvas.width,
        viewH: canvas.height,
        seed: Date.now() & 0xffff,
        player: state.player || "anonymous",
        device: state.device,
      });
      state.popper.start(t);
      state.screen = "popper";
    } else {
      state.typewriter = new TypeWriterSession(SENTENCES, state.player || "anonymous", state.device);
      state.typewriter.start(t);
      state.keyboard = new VirtualKeyboard(40, canvas.height - 260, canvas.width - 80, 60);
      state.screen = "typewriter";
    }
  }

  function buildMenu(): void {
    controls.innerHTML = "";
    const abilitySel = document.createElement("select");
    for (const [value, label] of [["normal", "Normal"], ["special", "Special"]]) {
      const opt = document.createElement("option");
      opt.value = value;
      opt.textContent = `player type: ${label}`;
      abilitySel.appendChild(opt);
    }
    abilitySel.value = state.ability;
    abilitySel.onchange = () => (state.ability = abilitySel.value as Ability);

    const deviceSel = document.createElement("select");
    for (const device of ["pointer", "auxilio"]) {
      const opt = document.createElement("option");
      opt.value = device;
      opt.textContent = `input: ${device}`;
      deviceSel.appendChild(opt);
    }
    deviceSel.value = state.device;
    deviceSel.onchange = () => (state.device = deviceSel.value as Device);

    const appSel = document.createElement("select");
    for (const app of ["popper", "typewriter"]) {
      const opt = document.createElement("option");
      opt.value = app;
      opt.textContent = `app: ${app}`;
      appSel.appendChild(opt);
    }
    appSel.value = state.app;
    appSel.onchange = () => (state.app = appSel.value as AppState["app"]);

    const name = document.createElement("input");
    name.placeholder = "player name";
    name.onchange = () => (state.player = name.value);

    const start = document.createElement("button");
    start.textContent = "start";
    start.onclick = startSession;

    for (const el of [abilitySel, deviceSel, appSel, name, start]) {
      controls.appendChild(el);
    }
  }

  canvas.addEventListener("mousemove", (ev) => {
    if (state.device !== "pointer") {
      return;
    }
    const rect = canvas.getBoundingClientRect();
    const x = ev.clientX - rect.left;
    const y = ev.clientY - rect.top;
    state.cursor = [x, y];
    state.popper?.cursorMove(x, y);
  });
  canvas.addEventListener("mousedown", (ev) => {
    if (state.device !== "pointer") {
      return;
    }
    const rect = canvas.getBoundingClientRect();
    handleClick(ev.clientX - rect.left, ev.clientY - rect.top);
  });

  function draw(): void {
    ctx.fillStyle = "#10141c";
    ctx.fillRect(0, 0, canvas.width, canvas.height);
    ctx.fillStyle = "#e8e8e8";
    ctx.font = "16px sans-serif";

    if (state.screen === "popper" && state.popper) {
      const session = state.popper;
      ctx.fillText(
        `player: ${state.player || "anonymous"}   level ${session.currentLevel().level}` +
        `   popped: ${session.poppedCount()}`,
        16, 24);
      if (session.phase === "playing") {
        const b = session.currentBalloon();
        if (b) {
          ctx.beginPath();
          ctx.fillStyle = "#d9534f";
          ctx.arc(b.cx, b.cy, b.w / 2, 0, 2 * Math.PI);
          ctx.fill();
        }
      } else {
        const stats = session.rewardStats();
        ctx.fillStyle = "#e8e8e8";
        ctx.font = "24px sans-serif";
        if (session.phase === "reward" && stats) {
          ctx.fillText(`level ${stats.level} complete!`, canvas.width / 2 - 110, canvas.height / 2 - 30);
          ctx.font = "16px sans-serif";
          ctx.fillText(
            `time ${stats.levelTime.toFixed(1)} s, miss-clicks ${stats.missClicks} - click to continue`,
            canvas.width / 2 - 170, canvas.height / 2 + 4);
        } else if (session.phase === "done") {
          ctx.fillText("session complete - download your log below", canvas.width / 2 - 220, canvas.height / 2);
        }
      }
    } else if (state.screen === "typewriter" && state.typewriter && state.keyboard) {
      const session = state.typewriter;
      ctx.fillText(`level ${session.level()} of ${session.sentences.length}`, 16, 24);
      ctx.font = "26px monospace";
      ctx.fillStyle = "#4caf50";
      ctx.fillText(session.target() ?? "all sentences complete!", 40, 110);
      ctx.fillStyle = "#d9534f";
      ctx.fillText(session.typed, 40, 160);
      for (const key of state.keyboard.keys()) {
        ctx.strokeStyle = "#888";
        ctx.strokeRect(key.x + 2, key.y + 2, key.w - 4, key.h - 4);
        ctx.fillStyle = "#e8e8e8";
        ctx.font = "18px monospace";
        ctx.fillText(key.label, key.x + key.w / 2 - 6, key.y + key.h / 2 + 6);
      }
    } else {
      ctx.font = "24px sans-serif";
      ctx.fillText("Auxilio taskboard", canvas.width / 2 - 100, canvas.height / 2 - 40);
      ctx.font = "16px sans-serif";
      ctx.fillText("choose player type, input device and app below, then press start",
        canvas.width / 2 - 230, canvas.height / 2);
    }

    // Cursor dot (driver-driven runs render their own pointer).
    ctx.beginPath();
    ctx.fillStyle = "#ffd54f";
    ctx.arc(state.cursor[0], state.cursor[1], 6, 0, 2 * Math.PI);
    ctx.fill();
    requestAnimationFrame(draw);
  }

  buildMenu();
  requestAnimationFrame(draw);
}

main();
