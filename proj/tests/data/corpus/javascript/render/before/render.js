'use strict';

function renderComment(el, comment) {
  el.innerHTML = '<b>' + comment.author + '</b>: ' + comment.text;
}

const renderAll = (el, comments) => {
  comments.forEach((c) => {
    const item = document.createElement('li');
    renderComment(item, c);
    el.appendChild(item);
  });
};

module.exports = { renderComment, renderAll };
