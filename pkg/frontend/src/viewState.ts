/**
 * Client-side session state: everything rendered comes from server messages,
 * never from local simulation. Keeps the latest state update, the pending
 * prompt (cleared the moment the server moves past it), rolling per-episode
 * charts, and the connection banner flag.
 */

import {
  Envelope,
  ErrorMessage,
  PromptMessage,
  SessionInfo,
  StateUpdate,
} from "./protocol.js";

export const CHART_WINDOW = 200;

export interface EpisodeSample {
  episode: number;
  steps: number;
  reward: number;
  interactions: number;
}

export class ViewState {
  info: SessionInfo | null = null;
  lastUpdate: StateUpdate | null = null;
  pendingPrompt: PromptMessage | null = null;
  promptStale = false;
  mode = "paused";
  connected = false;
  crashFlash = false;
  episodes: EpisodeSample[] = [];
  errors: ErrorMessage[] = [];

  private currentSteps = 0;
  private currentReward = 0;
  private currentInteractions = 0;

  handle(message: Envelope): void {
    switch (message.type) {
      case "session_info": {
        this.info = message.payload as SessionInfo;
        this.mode = this.info.mode;
        break;
      }
      case "prompt": {
        this.pendingPrompt = message.payload as PromptMessage;
        this.promptStale = false;
        break;
      }
      case "state_update": {
        const update = message.payload as StateUpdate;
        this.lastUpdate = update;
        this.crashFlash = update.reward <= -100;
        this.currentSteps += 1;
        this.currentReward += update.reward;
        if (update.source === "fresh_advice") {
          this.currentInteractions += 1;
        }
        if (update.terminal) {
          this.pushEpisode(update.episode);
        }
        if (this.pendingPrompt && update.step >= this.pendingPrompt.step) {
          // the server moved past the prompted step; submissions would be stale
          this.pendingPrompt = null;
          this.promptStale = true;
        }
        break;
      }
      case "error": {
        this.errors.push(message.payload as ErrorMessage);
        break;
      }
      case "ack":
        break;
      default:
        break;
    }
  }

  private pushEpisode(episode: number): void {
    this.episodes.push({
      episode,
      steps: this.currentSteps,
      reward: this.currentReward,
      interactions: this.currentInteractions,
    });
    if (this.episodes.length > CHART_WINDOW) {
      this.episodes.splice(0, this.episodes.length - CHART_WINDOW);
    }
    this.currentSteps = 0;
    this.currentReward = 0;
    this.currentInteractions = 0;
  }

  setConnected(connected: boolean): void {
    this.connected = connected;
  }

  clearPrompt(): void {
    this.pendingPrompt = null;
  }
}
