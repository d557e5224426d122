const express = require('express');

const router = express.Router();

router.get('/go', function (req, res) {
  const to = String(req.query.to || '/');
  res.redirect(to.startsWith('/') && !to.startsWith('//') ? to : '/');
});

router.get('/home', (req, res) => res.send('home'));

module.exports = router;
